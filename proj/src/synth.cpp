#include "syncslam/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

namespace syncslam {

double amplitude_from_distance(double d, const NoiseConfig& cfg) {
    if (!(d > 0.0)) throw std::invalid_argument("amplitude_from_distance: distance must be positive");
    const double snr_db = cfg.snr_ref_db - 20.0 * std::log10(d / cfg.d_ref);
    return std::sqrt(std::pow(10.0, snr_db / 10.0));
}

double aperture_sq(double angle, const ArrayConfig& array, double floor) {
    const double h = static_cast<double>(array.elements);
    const double s = std::sin(angle);
    const double d2 = array.spacing * array.spacing * s * s * (h * h - 1.0) / 12.0;
    return std::max(d2, floor);
}

NoiseStddevs noise_stddevs(double z_u, double aoa, double aod, const NoiseConfig& cfg) {
    if (!(z_u > 0.0)) throw std::invalid_argument("noise_stddevs: amplitude must be positive");
    const double d2_mt = aperture_sq(aoa, cfg.array_mt, cfg.d2_floor);
    const double d2_bs = aperture_sq(aod, cfg.array_bs, cfg.d2_floor);
    if (!(d2_mt > 0.0) || !(d2_bs > 0.0))
        throw std::invalid_argument("noise_stddevs: zero array aperture (endfire); set a positive d2_floor");
    const double k = 8.0 * kPi * kPi * z_u * z_u;
    NoiseStddevs s;
    s.d = std::sqrt(kSpeedOfLight * kSpeedOfLight / (k * cfg.beta_bw * cfg.beta_bw));
    s.phi = std::sqrt(1.0 / (k * d2_mt));
    s.theta = std::sqrt(1.0 / (k * d2_bs));
    return s;
}

namespace {

bool blocked(const Vec2& p, const Vec2& q, const std::vector<Wall>& walls, std::size_t skip) {
    for (std::size_t w = 0; w < walls.size(); ++w) {
        if (w == skip) continue;
        if (segments_intersect(p, q, walls[w].endpoint_a, walls[w].endpoint_b)) return true;
    }
    return false;
}

bool va_visible(const Vec2& p_bs, const Vec2& p_mt, const std::vector<Wall>& walls, std::size_t w) {
    const auto q = reflection_point(p_bs, p_mt, walls[w]);
    if (!q) return false;
    const Wall& wall = walls[w];
    const Vec2 dir = wall.endpoint_b - wall.endpoint_a;
    const double t = (*q - wall.endpoint_a).dot(dir) / dir.squaredNorm();
    if (t < 0.0 || t > 1.0) return false;
    return !blocked(p_bs, *q, walls, w) && !blocked(*q, p_mt, walls, w);
}

}  // namespace

SynthOutput synthesize(const SynthInput& in, const NoiseConfig& cfg, Rng& rng) {
    if (in.bs_biases.size() != in.base_stations.size())
        throw std::invalid_argument("synthesize: one bias per base station required");
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> n01(0.0, 1.0);

    SynthOutput out;
    auto emit = [&](const Vec2& feature, std::size_t j, std::size_t feature_id) {
        const bool detected = u01(rng) < cfg.p_d;
        if (!detected) return;
        const GeoObservation g = geo_observation(feature, in.mt.position, in.mt.orientation);
        double z_u = amplitude_from_distance(g.distance, cfg);
        if (cfg.amplitude_mode == AmplitudeMode::kRician) {
            const std::complex<double> noise(n01(rng), n01(rng));
            z_u = std::abs(z_u + noise / std::sqrt(2.0));
        }
        if (z_u < cfg.gamma) return;
        const NoiseStddevs s = noise_stddevs(z_u, g.aoa, g.aod, cfg);
        Measurement m;
        m.z_d = biased_distance(g.distance, in.bs_biases[j], in.mt.bias) + s.d * n01(rng);
        m.z_phi = wrap_angle(g.aoa + s.phi * n01(rng));
        m.z_theta = wrap_angle(g.aod + s.theta * n01(rng));
        m.z_u = z_u;
        if (m.z_d < 0.0 || m.z_d > cfg.d_max) return;
        out.measurements.push_back(m);
        out.labels.push_back({in.base_stations[j].id, feature_id});
    };

    for (std::size_t j = 0; j < in.base_stations.size(); ++j) {
        const BaseStation& bs = in.base_stations[j];
        const bool los_ok =
            in.visibility == Visibility::kNone || !blocked(bs.position, in.mt.position, in.walls, in.walls.size());
        if (los_ok) emit(bs.position, j, 0);
        for (const VirtualAnchor& va : in.vas) {
            if (va.bs_id != bs.id) continue;
            const bool ok = in.visibility == Visibility::kNone ||
                            va_visible(bs.position, in.mt.position, in.walls, va.wall_id - 1);
            if (ok) emit(va.position, j, va.wall_id);
        }
    }

    std::poisson_distribution<int> n_fp(cfg.mu_fp);
    const int fps = cfg.mu_fp > 0.0 ? n_fp(rng) : 0;
    for (int f = 0; f < fps; ++f) {
        Measurement m;
        m.z_d = u01(rng) * cfg.d_max;
        m.z_phi = wrap_angle(-kPi + u01(rng) * kTwoPi);
        m.z_theta = wrap_angle(-kPi + u01(rng) * kTwoPi);
        m.z_u = cfg.gamma + u01(rng) * (cfg.fp_amplitude_factor - 1.0) * cfg.gamma;
        out.measurements.push_back(m);
        out.labels.push_back({0, 0});
    }

    std::vector<std::size_t> order(out.measurements.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    SynthOutput permuted;
    permuted.measurements.reserve(order.size());
    permuted.labels.reserve(order.size());
    for (std::size_t k : order) {
        permuted.measurements.push_back(out.measurements[k]);
        permuted.labels.push_back(out.labels[k]);
    }
    return permuted;
}

std::string to_string(AmplitudeMode m) { return m == AmplitudeMode::kRician ? "rician" : "deterministic"; }

AmplitudeMode amplitude_mode_from_string(const std::string& s) {
    if (s == "deterministic") return AmplitudeMode::kDeterministic;
    if (s == "rician") return AmplitudeMode::kRician;
    throw std::invalid_argument("unknown amplitude mode: " + s);
}

std::string to_string(Visibility v) { return v == Visibility::kSegment ? "segment" : "none"; }

Visibility visibility_from_string(const std::string& s) {
    if (s == "none") return Visibility::kNone;
    if (s == "segment") return Visibility::kSegment;
    throw std::invalid_argument("unknown visibility mode: " + s);
}

}  // namespace syncslam
