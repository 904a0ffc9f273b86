#include "syncslam/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace syncslam {

void validate(const ScenarioConfig& cfg) {
    if (cfg.n_steps < 1) throw std::invalid_argument("scenario: n_steps must be >= 1");
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("scenario: dt must be > 0");
    if (cfg.base_stations.empty()) throw std::invalid_argument("scenario: at least one base station required");
    if (cfg.mts.empty()) throw std::invalid_argument("scenario: at least one MT required");
    for (std::size_t w = 0; w < cfg.walls.size(); ++w)
        if (!(cfg.walls[w].length() > 0.0))
            throw std::invalid_argument("scenario: wall " + std::to_string(w + 1) + " is degenerate");
    for (std::size_t j = 0; j < cfg.base_stations.size(); ++j)
        if (cfg.base_stations[j].id != j + 1) throw std::invalid_argument("scenario: BS ids must be 1..J in order");
    const NoiseConfig& n = cfg.noise;
    if (!(n.beta_bw > 0.0) || !(n.d_ref > 0.0) || !(n.gamma > 0.0) || !(n.mu_fp >= 0.0) || n.d_max < 0.0)
        throw std::invalid_argument("scenario: noise parameters must be positive");
    if (!(n.p_d > 0.0 && n.p_d <= 1.0)) throw std::invalid_argument("scenario: noise.p_d must be in (0,1]");
    if (n.array_mt.elements < 2 || n.array_bs.elements < 2)
        throw std::invalid_argument("scenario: arrays need at least two elements");
    if (cfg.truth.bs_bias_range.first > cfg.truth.bs_bias_range.second ||
        cfg.truth.mt_bias_range.first > cfg.truth.mt_bias_range.second)
        throw std::invalid_argument("scenario: bias ranges must be ordered");
    validate(cfg.engine);
}

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    cfg.walls = {
        {{0.0, 0.0}, {0.0, 8.0}},
        {{0.0, 0.0}, {12.0, 0.0}},
        {{12.0, 0.0}, {12.0, 8.0}},
    };
    cfg.base_stations = {
        {1, {3.0, 7.0}, 0.0},
        {2, {9.0, 6.5}, 0.0},
    };
    cfg.mts = {
        {{2.5, 2.0}, 0.0, 0.15, {{0, 0.0}, {20, 0.01}, {35, -0.01}}},
        {{9.5, 3.5}, kPi, 0.12, {{0, 0.0}, {25, -0.012}}},
    };
    cfg.n_steps = 50;
    cfg.dt = 1.0;
    cfg.seed = 1;
    return cfg;
}

double resolved_d_max(const ScenarioConfig& cfg) {
    if (cfg.noise.d_max > 0.0) return cfg.noise.d_max;
    double lo_x = std::numeric_limits<double>::max(), lo_y = lo_x;
    double hi_x = std::numeric_limits<double>::lowest(), hi_y = hi_x;
    auto grow = [&](const Vec2& p) {
        lo_x = std::min(lo_x, p.x());
        lo_y = std::min(lo_y, p.y());
        hi_x = std::max(hi_x, p.x());
        hi_y = std::max(hi_y, p.y());
    };
    for (const Wall& w : cfg.walls) {
        grow(w.endpoint_a);
        grow(w.endpoint_b);
    }
    for (const BaseStation& b : cfg.base_stations) grow(b.position);
    for (const MtInit& m : cfg.mts) grow(m.position);
    const double diagonal = std::hypot(hi_x - lo_x, hi_y - lo_y);
    // single-bounce paths are at most twice the diagonal; the apparent delay
    // b_bs - b_mt adds at most the largest bias difference
    const double max_delay = cfg.truth.bs_bias_range.second - cfg.truth.mt_bias_range.first;
    return 2.0 * diagonal + std::max(0.0, max_delay) + 5.0;
}

ScenarioConfig resolve(ScenarioConfig cfg) {
    cfg.noise.d_max = resolved_d_max(cfg);
    return cfg;
}

std::vector<VirtualAnchor> build_environment(const ScenarioConfig& cfg) {
    std::vector<VirtualAnchor> vas;
    vas.reserve(cfg.base_stations.size() * cfg.walls.size());
    for (const BaseStation& bs : cfg.base_stations) {
        for (std::size_t w = 0; w < cfg.walls.size(); ++w) {
            vas.push_back({bs.id, w + 1, mirror_point(bs.position, cfg.walls[w])});
        }
    }
    return vas;
}

namespace {

double turn_rate_at(const MtInit& m, std::size_t step) {
    double rate = 0.0;
    std::size_t best = 0;
    bool found = false;
    for (const TurnSegment& s : m.turn_schedule) {
        if (s.start_step <= step && (!found || s.start_step >= best)) {
            best = s.start_step;
            rate = s.turn_rate;
            found = true;
        }
    }
    return rate;
}

}  // namespace

GroundTruth generate_trajectories(const ScenarioConfig& cfg, Rng& rng) {
    validate(cfg);
    GroundTruth gt;
    gt.vas = build_environment(cfg);
    const std::size_t n_mt = cfg.mts.size();
    const std::size_t n_bs = cfg.base_stations.size();
    gt.mt.assign(cfg.n_steps + 1, std::vector<MtState>(n_mt));
    gt.bs_bias.assign(cfg.n_steps + 1, std::vector<double>(n_bs));
    gt.labels.assign(cfg.n_steps + 1, std::vector<std::vector<OriginLabel>>(n_mt));

    const TruthConfig& t = cfg.truth;
    for (std::size_t j = 0; j < n_bs; ++j)
        gt.bs_bias[0][j] = uniform(rng, t.bs_bias_range.first, t.bs_bias_range.second) + t.bias_offset;
    for (std::size_t i = 0; i < n_mt; ++i) {
        const MtInit& init = cfg.mts[i];
        MtState& s = gt.mt[0][i];
        s.position = init.position;
        s.orientation = wrap_angle(init.orientation);
        s.velocity = init.speed * Vec2{std::cos(init.orientation), std::sin(init.orientation)};
        s.bias = uniform(rng, t.mt_bias_range.first, t.mt_bias_range.second) + t.bias_offset;
    }

    for (std::size_t n = 1; n <= cfg.n_steps; ++n) {
        for (std::size_t j = 0; j < n_bs; ++j)
            gt.bs_bias[n][j] = gt.bs_bias[n - 1][j] + gaussian(rng, t.bias_walk_sigma_bs);
        for (std::size_t i = 0; i < n_mt; ++i) {
            const MtState& prev = gt.mt[n - 1][i];
            MtState& s = gt.mt[n][i];
            const double heading = std::atan2(prev.velocity.y(), prev.velocity.x());
            const double speed = prev.velocity.norm();
            const double new_heading = heading + turn_rate_at(cfg.mts[i], n - 1) * cfg.dt;
            s.velocity = speed * Vec2{std::cos(new_heading), std::sin(new_heading)};
            s.position = prev.position + s.velocity * cfg.dt;
            s.orientation = speed > 0.0 ? wrap_angle(new_heading) : prev.orientation;
            s.bias = prev.bias + gaussian(rng, t.bias_walk_sigma_mt);
        }
    }
    return gt;
}

GroundTruth generate_trajectories(const ScenarioConfig& cfg) {
    Rng rng = make_stream(cfg.seed, {tag(StreamTag::kTrajectory)});
    return generate_trajectories(cfg, rng);
}

MeasurementLog simulate_measurements(const ScenarioConfig& cfg, GroundTruth& truth) {
    const ScenarioConfig rc = resolve(cfg);
    MeasurementLog log(rc.n_steps + 1, std::vector<std::vector<Measurement>>(rc.mts.size()));
    for (std::size_t n = 1; n <= rc.n_steps; ++n) {
        for (std::size_t i = 0; i < rc.mts.size(); ++i) {
            Rng rng = make_stream(rc.seed, {tag(StreamTag::kMeasurement), n, i});
            SynthInput in;
            in.mt = truth.mt[n][i];
            in.base_stations = rc.base_stations;
            in.bs_biases = truth.bs_bias[n];
            in.vas = truth.vas;
            in.walls = rc.walls;
            in.visibility = rc.visibility;
            SynthOutput out = synthesize(in, rc.noise, rng);
            log[n][i] = std::move(out.measurements);
            truth.labels[n][i] = std::move(out.labels);
        }
    }
    return log;
}

// ---------------------------------------------------------------------------
// YAML

namespace {

YAML::Node vec_node(const Vec2& v) {
    YAML::Node n(YAML::NodeType::Sequence);
    n.SetStyle(YAML::EmitterStyle::Flow);
    n.push_back(v.x());
    n.push_back(v.y());
    return n;
}

Vec2 read_vec(const YAML::Node& n, const char* what) {
    if (!n.IsSequence() || n.size() != 2) throw std::invalid_argument(std::string("scenario: ") + what + " needs [x, y]");
    return {n[0].as<double>(), n[1].as<double>()};
}

template <typename T>
void read_opt(const YAML::Node& parent, const char* key, T& out) {
    if (parent && parent[key]) out = parent[key].as<T>();
}

YAML::Node array_node(const ArrayConfig& a) {
    YAML::Node n;
    n["elements"] = a.elements;
    n["spacing"] = a.spacing;
    return n;
}

void read_array(const YAML::Node& n, ArrayConfig& a) {
    if (!n) return;
    read_opt(n, "elements", a.elements);
    read_opt(n, "spacing", a.spacing);
}

YAML::Node range_node(const std::pair<double, double>& r) {
    YAML::Node n(YAML::NodeType::Sequence);
    n.SetStyle(YAML::EmitterStyle::Flow);
    n.push_back(r.first);
    n.push_back(r.second);
    return n;
}

void read_range(const YAML::Node& n, std::pair<double, double>& r) {
    if (!n) return;
    if (!n.IsSequence() || n.size() != 2) throw std::invalid_argument("scenario: ranges need [lo, hi]");
    r = {n[0].as<double>(), n[1].as<double>()};
}

}  // namespace

std::string scenario_to_yaml(const ScenarioConfig& cfg) {
    YAML::Node root;
    root["schema_version"] = 1;
    root["seed"] = cfg.seed;
    root["n_steps"] = cfg.n_steps;
    root["dt"] = cfg.dt;
    root["visibility"] = to_string(cfg.visibility);

    YAML::Node walls(YAML::NodeType::Sequence);
    for (const Wall& w : cfg.walls) {
        YAML::Node n(YAML::NodeType::Sequence);
        n.SetStyle(YAML::EmitterStyle::Flow);
        n.push_back(w.endpoint_a.x());
        n.push_back(w.endpoint_a.y());
        n.push_back(w.endpoint_b.x());
        n.push_back(w.endpoint_b.y());
        walls.push_back(n);
    }
    root["walls"] = walls;

    YAML::Node bss(YAML::NodeType::Sequence);
    for (const BaseStation& b : cfg.base_stations) bss.push_back(vec_node(b.position));
    root["base_stations"] = bss;

    YAML::Node mts(YAML::NodeType::Sequence);
    for (const MtInit& m : cfg.mts) {
        YAML::Node n;
        n["position"] = vec_node(m.position);
        n["orientation"] = m.orientation;
        n["speed"] = m.speed;
        YAML::Node sched(YAML::NodeType::Sequence);
        for (const TurnSegment& s : m.turn_schedule) {
            YAML::Node e(YAML::NodeType::Sequence);
            e.SetStyle(YAML::EmitterStyle::Flow);
            e.push_back(s.start_step);
            e.push_back(s.turn_rate);
            sched.push_back(e);
        }
        n["turn_schedule"] = sched;
        mts.push_back(n);
    }
    root["mts"] = mts;

    YAML::Node truth;
    truth["bs_bias_range"] = range_node(cfg.truth.bs_bias_range);
    truth["mt_bias_range"] = range_node(cfg.truth.mt_bias_range);
    truth["bias_offset"] = cfg.truth.bias_offset;
    truth["bias_walk_sigma_bs"] = cfg.truth.bias_walk_sigma_bs;
    truth["bias_walk_sigma_mt"] = cfg.truth.bias_walk_sigma_mt;
    root["truth"] = truth;

    const NoiseConfig& nc = cfg.noise;
    YAML::Node noise;
    noise["beta_bw"] = nc.beta_bw;
    noise["array_mt"] = array_node(nc.array_mt);
    noise["array_bs"] = array_node(nc.array_bs);
    noise["snr_ref_db"] = nc.snr_ref_db;
    noise["d_ref"] = nc.d_ref;
    noise["gamma"] = nc.gamma;
    noise["p_d"] = nc.p_d;
    noise["mu_fp"] = nc.mu_fp;
    noise["d_max"] = nc.d_max;
    noise["d2_floor"] = nc.d2_floor;
    noise["fp_amplitude_factor"] = nc.fp_amplitude_factor;
    noise["amplitude_mode"] = to_string(nc.amplitude_mode);
    root["noise"] = noise;

    const EngineConfig& e = cfg.engine;
    YAML::Node eng;
    eng["p_d"] = e.p_d;
    eng["p_s"] = e.p_s;
    eng["mu_n"] = e.mu_n;
    eng["mu_fp"] = e.mu_fp;
    eng["p_cf"] = e.p_cf;
    eng["p_pr"] = e.p_pr;
    eng["particles_mt"] = e.particles_mt;
    eng["particles_pva"] = e.particles_pva;
    eng["particles_bias"] = e.particles_bias;
    eng["da_max_iters"] = e.da_max_iters;
    eng["da_tol"] = e.da_tol;
    eng["outer_iters"] = e.outer_iters;
    eng["accel_sigma"] = e.accel_sigma;
    eng["orientation_sigma"] = e.orientation_sigma;
    eng["bias_sigma_mt"] = e.bias_sigma_mt;
    eng["bias_sigma_bs"] = e.bias_sigma_bs;
    eng["prior_pos_sigma_x"] = e.prior_pos_sigma_x;
    eng["prior_pos_sigma_y"] = e.prior_pos_sigma_y;
    eng["prior_vel_sigma"] = e.prior_vel_sigma;
    eng["prior_orientation_sigma"] = e.prior_orientation_sigma;
    eng["bias_prior"] = to_string(e.bias_prior);
    eng["resample_ess_fraction"] = e.resample_ess_fraction;
    eng["jitter_scale"] = e.jitter_scale;
    eng["jitter_position"] = e.jitter_position;
    eng["jitter_orientation"] = e.jitter_orientation;
    eng["jitter_bias"] = e.jitter_bias;
    eng["beta_samples"] = e.beta_samples;
    eng["gate_chi2"] = e.gate_chi2;
    eng["bias_sharp_std"] = e.bias_sharp_std;
    eng["bias_proposal_sigma"] = e.bias_proposal_sigma;
    eng["bias_prior_floor"] = e.bias_prior_floor;
    eng["prune"] = e.prune;
    root["engine"] = eng;

    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << root;
    return std::string(out.c_str()) + "\n";
}

ScenarioConfig scenario_from_yaml(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& ex) {
        throw std::invalid_argument(std::string("scenario: malformed YAML: ") + ex.what());
    }
    if (!root.IsMap()) throw std::invalid_argument("scenario: top level must be a mapping");
    if (root["schema_version"] && root["schema_version"].as<int>() != 1)
        throw std::invalid_argument("scenario: unsupported schema_version");

    ScenarioConfig cfg;
    try {
        read_opt(root, "seed", cfg.seed);
        read_opt(root, "n_steps", cfg.n_steps);
        read_opt(root, "dt", cfg.dt);
        if (root["visibility"]) cfg.visibility = visibility_from_string(root["visibility"].as<std::string>());

        if (root["walls"]) {
            for (const YAML::Node& n : root["walls"]) {
                if (!n.IsSequence() || n.size() != 4) throw std::invalid_argument("scenario: wall needs [ax, ay, bx, by]");
                cfg.walls.push_back({{n[0].as<double>(), n[1].as<double>()}, {n[2].as<double>(), n[3].as<double>()}});
            }
        }
        if (root["base_stations"]) {
            std::size_t id = 1;
            for (const YAML::Node& n : root["base_stations"]) cfg.base_stations.push_back({id++, read_vec(n, "base station"), 0.0});
        }
        if (root["mts"]) {
            for (const YAML::Node& n : root["mts"]) {
                MtInit m;
                m.position = read_vec(n["position"], "mt position");
                read_opt(n, "orientation", m.orientation);
                read_opt(n, "speed", m.speed);
                if (n["turn_schedule"]) {
                    for (const YAML::Node& s : n["turn_schedule"]) {
                        if (!s.IsSequence() || s.size() != 2)
                            throw std::invalid_argument("scenario: turn_schedule entries need [step, rate]");
                        m.turn_schedule.push_back({s[0].as<std::size_t>(), s[1].as<double>()});
                    }
                }
                cfg.mts.push_back(std::move(m));
            }
        }

        if (const YAML::Node t = root["truth"]) {
            read_range(t["bs_bias_range"], cfg.truth.bs_bias_range);
            read_range(t["mt_bias_range"], cfg.truth.mt_bias_range);
            read_opt(t, "bias_offset", cfg.truth.bias_offset);
            read_opt(t, "bias_walk_sigma_bs", cfg.truth.bias_walk_sigma_bs);
            read_opt(t, "bias_walk_sigma_mt", cfg.truth.bias_walk_sigma_mt);
        }

        if (const YAML::Node n = root["noise"]) {
            NoiseConfig& nc = cfg.noise;
            read_opt(n, "beta_bw", nc.beta_bw);
            read_array(n["array_mt"], nc.array_mt);
            read_array(n["array_bs"], nc.array_bs);
            read_opt(n, "snr_ref_db", nc.snr_ref_db);
            read_opt(n, "d_ref", nc.d_ref);
            read_opt(n, "gamma", nc.gamma);
            read_opt(n, "p_d", nc.p_d);
            read_opt(n, "mu_fp", nc.mu_fp);
            read_opt(n, "d_max", nc.d_max);
            read_opt(n, "d2_floor", nc.d2_floor);
            read_opt(n, "fp_amplitude_factor", nc.fp_amplitude_factor);
            if (n["amplitude_mode"]) nc.amplitude_mode = amplitude_mode_from_string(n["amplitude_mode"].as<std::string>());
        }

        if (const YAML::Node n = root["engine"]) {
            EngineConfig& e = cfg.engine;
            read_opt(n, "p_d", e.p_d);
            read_opt(n, "p_s", e.p_s);
            read_opt(n, "mu_n", e.mu_n);
            read_opt(n, "mu_fp", e.mu_fp);
            read_opt(n, "p_cf", e.p_cf);
            read_opt(n, "p_pr", e.p_pr);
            read_opt(n, "particles_mt", e.particles_mt);
            read_opt(n, "particles_pva", e.particles_pva);
            read_opt(n, "particles_bias", e.particles_bias);
            read_opt(n, "da_max_iters", e.da_max_iters);
            read_opt(n, "da_tol", e.da_tol);
            read_opt(n, "outer_iters", e.outer_iters);
            read_opt(n, "accel_sigma", e.accel_sigma);
            read_opt(n, "orientation_sigma", e.orientation_sigma);
            read_opt(n, "bias_sigma_mt", e.bias_sigma_mt);
            read_opt(n, "bias_sigma_bs", e.bias_sigma_bs);
            read_opt(n, "prior_pos_sigma_x", e.prior_pos_sigma_x);
            read_opt(n, "prior_pos_sigma_y", e.prior_pos_sigma_y);
            read_opt(n, "prior_vel_sigma", e.prior_vel_sigma);
            read_opt(n, "prior_orientation_sigma", e.prior_orientation_sigma);
            if (n["bias_prior"]) e.bias_prior = bias_prior_from_string(n["bias_prior"].as<std::string>());
            read_opt(n, "resample_ess_fraction", e.resample_ess_fraction);
            read_opt(n, "jitter_scale", e.jitter_scale);
            read_opt(n, "jitter_position", e.jitter_position);
            read_opt(n, "jitter_orientation", e.jitter_orientation);
            read_opt(n, "jitter_bias", e.jitter_bias);
            read_opt(n, "beta_samples", e.beta_samples);
            read_opt(n, "gate_chi2", e.gate_chi2);
            read_opt(n, "bias_sharp_std", e.bias_sharp_std);
            read_opt(n, "bias_proposal_sigma", e.bias_proposal_sigma);
            read_opt(n, "bias_prior_floor", e.bias_prior_floor);
            read_opt(n, "prune", e.prune);
        }
    } catch (const YAML::Exception& ex) {
        throw std::invalid_argument(std::string("scenario: bad value: ") + ex.what());
    }
    validate(cfg);
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_yaml(ss.str());
}

void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scenario file: " + path);
    out << scenario_to_yaml(cfg);
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) { return scenario_to_yaml(a) == scenario_to_yaml(b); }

}  // namespace syncslam
