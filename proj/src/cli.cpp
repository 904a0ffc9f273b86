#include "syncslam/cli.hpp"

#include "syncslam/assoc.hpp"
#include "syncslam/oracle.hpp"
#include "syncslam/records.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace syncslam {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<Estimates> run_engine(const ScenarioConfig& cfg, const GroundTruth& truth, const MeasurementLog& log,
                                  std::size_t threads) {
    Engine engine(cfg, truth, threads);
    std::vector<Estimates> out;
    out.reserve(cfg.n_steps);
    for (std::size_t n = 1; n <= cfg.n_steps; ++n) {
        if (n < log.size())
            out.push_back(engine.step(log[n]));
        else
            out.push_back(engine.step(std::vector<std::vector<Measurement>>(cfg.mts.size())));
    }
    return out;
}

RunArtifacts simulate_and_estimate(const ScenarioConfig& cfg, std::size_t threads) {
    RunArtifacts a;
    a.config = resolve(cfg);
    a.truth = generate_trajectories(a.config);
    a.measurements = simulate_measurements(a.config, a.truth);
    a.estimates = run_engine(a.config, a.truth, a.measurements, threads);
    a.metrics = evaluate(a.estimates, a.truth);
    return a;
}

namespace {

ScenarioConfig configured(const RunOptions& opt) {
    ScenarioConfig cfg = opt.scenario_path ? load_scenario(*opt.scenario_path) : default_scenario();
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.no_prune) cfg.engine.prune = false;
    if (opt.outer_iters) cfg.engine.outer_iters = *opt.outer_iters;
    validate(cfg);
    return resolve(cfg);
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

void write_outputs(const fs::path& dir, const std::string& command, const RunOptions& opt, const ScenarioConfig& cfg,
                   const GroundTruth& truth, const MeasurementLog* log, const std::vector<Estimates>& est) {
    fs::create_directories(dir);
    const std::string yaml = scenario_to_yaml(cfg);
    std::vector<std::string> files{"scenario.yaml", "truth.json", "estimates.jsonl", "metrics.csv", "manifest.json"};
    write_file(dir / "scenario.yaml", yaml);
    write_file(dir / "truth.json", truth_to_json(truth));
    if (log) {
        std::ostringstream os;
        write_measurements(os, *log);
        write_file(dir / "measurements.jsonl", os.str());
        files.insert(files.begin() + 2, "measurements.jsonl");
    }
    std::ostringstream es;
    for (const Estimates& e : est) write_estimates(es, e);
    write_file(dir / "estimates.jsonl", es.str());
    write_file(dir / "metrics.csv", metrics_csv(evaluate(est, truth)));
    ManifestInfo info;
    info.command = command;
    info.seed = cfg.seed;
    info.scenario_yaml = yaml;
    info.threads = opt.threads;
    info.files = files;
    write_file(dir / "manifest.json", manifest_json(info));
}

void print_summary(std::ostream& log, const std::vector<Estimates>& est, const GroundTruth& truth) {
    const MetricsSummary s = summarize(evaluate(est, truth));
    log << "final-window position RMSE " << s.position_rmse << " m, bias-difference RMSE " << s.bias_difference_rmse
        << " m, OSPA " << s.ospa << " m, separation " << s.separation << " (" << s.matched << " matched)\n";
}

}  // namespace

int cmd_run(const RunOptions& opt, std::ostream& log) {
    try {
        const ScenarioConfig cfg = configured(opt);
        GroundTruth truth = generate_trajectories(cfg);
        const MeasurementLog z = simulate_measurements(cfg, truth);
        const std::vector<Estimates> est = run_engine(cfg, truth, z, opt.threads);
        write_outputs(opt.out_dir, "run", opt, cfg, truth, &z, est);
        print_summary(log, est, truth);
        return 0;
    } catch (const std::exception& ex) {
        log << "error: " << ex.what() << '\n';
        return 1;
    }
}

int cmd_replay(const std::string& measurements_path, const RunOptions& opt, std::ostream& log) {
    try {
        const ScenarioConfig cfg = configured(opt);
        std::ifstream in(measurements_path);
        if (!in) throw std::runtime_error("cannot open measurement file: " + measurements_path);
        const MeasurementLog z = read_measurements(in, cfg.mts.size(), cfg.n_steps);
        // trajectories do not depend on the measurement streams, so the priors match the recording
        const GroundTruth truth = generate_trajectories(cfg);
        const std::vector<Estimates> est = run_engine(cfg, truth, z, opt.threads);
        write_outputs(opt.out_dir, "replay", opt, cfg, truth, nullptr, est);
        print_summary(log, est, truth);
        return 0;
    } catch (const std::exception& ex) {
        log << "error: " << ex.what() << '\n';
        return 1;
    }
}

namespace {

json marginals_json(const AssociationMarginals& m) {
    return {{"p_underline", m.p_underline}, {"p_overline", m.p_overline}, {"p_source", m.p_source}};
}

}  // namespace

int cmd_oracle(const std::string& case_path, const std::string& out_path, std::ostream& log) {
    try {
        std::ifstream in(case_path);
        if (!in) throw std::runtime_error("cannot open oracle case: " + case_path);
        json c;
        try {
            c = json::parse(in);
        } catch (const json::exception& ex) {
            throw std::runtime_error(std::string("malformed oracle case: ") + ex.what());
        }
        const std::string type = c.value("type", "");
        json out;
        if (type == "association") {
            AssociationProblem p;
            p.J = c.value("J", std::size_t{0});
            p.beta = c.at("beta").get<std::vector<std::vector<double>>>();
            p.xi = c.at("xi").get<std::vector<double>>();
            if (c.contains("birth_weights"))
                p.birth_weights = c.at("birth_weights").get<std::vector<std::vector<double>>>();
            out = {{"type", "association"}, {"exact", marginals_json(da_exact(p))}};
        } else if (type == "corridor") {
            ScenarioConfig cfg = corridor_scenario();
            cfg.seed = c.value("seed", cfg.seed);
            cfg.n_steps = c.value("n_steps", cfg.n_steps);
            cfg = resolve(cfg);
            GroundTruth truth = generate_trajectories(cfg);
            const MeasurementLog z = simulate_measurements(cfg, truth);
            const GridPosterior g = corridor_grid_filter(cfg, truth, z, c.value("grid_points", std::size_t{200001}));
            out = {{"type", "corridor"}, {"seed", cfg.seed}, {"mean", g.mean}, {"stddev", g.stddev}};
        } else {
            throw std::runtime_error("unknown oracle case type '" + type + "'");
        }
        const std::string text = out.dump(2) + "\n";
        if (out_path.empty() || out_path == "-") {
            std::cout << text;
        } else {
            write_file(out_path, text);
        }
        return 0;
    } catch (const std::exception& ex) {
        log << "error: " << ex.what() << '\n';
        return 1;
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Multi-BS, multi-MT radio SLAM simulator and particle SPA estimator"};
    app.require_subcommand(1);

    RunOptions opt;
    std::string scenario;
    std::uint64_t seed = 0;
    std::size_t outer = 1;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario, "Scenario YAML file (default scenario if omitted)");
        sub->add_option("--seed", seed, "Override the scenario seed");
        sub->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
        sub->add_option("--threads", opt.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
        sub->add_flag("--no-prune", opt.no_prune, "Keep every hypothesis (bookkeeping test mode)");
        sub->add_option("--outer-iters", outer, "DA / belief-update iterations per MT update")->check(CLI::PositiveNumber);
    };

    CLI::App* run = app.add_subcommand("run", "Simulate a scenario and run the estimator");
    add_common(run);

    std::string measurements;
    CLI::App* replay = app.add_subcommand("replay", "Run the estimator on recorded measurements");
    replay->add_option("--measurements", measurements, "measurements.jsonl from an earlier run")->required();
    add_common(replay);

    std::string case_path, oracle_out;
    CLI::App* oracle = app.add_subcommand("oracle", "Evaluate a reference oracle on a fixture case");
    oracle->add_option("case", case_path, "Oracle case JSON")->required();
    oracle->add_option("--out", oracle_out, "Output file (stdout if omitted)");

    std::string defaults_out = "-";
    bool corridor = false;
    CLI::App* defaults = app.add_subcommand("defaults", "Print a canonical scenario file");
    defaults->add_flag("--corridor", corridor, "Corridor toy instead of the desk scenario");
    defaults->add_option("--out", defaults_out, "Output file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    auto finish_options = [&](CLI::App* sub) {
        if (sub->count("--scenario")) opt.scenario_path = scenario;
        if (sub->count("--seed")) opt.seed = seed;
        if (sub->count("--outer-iters")) opt.outer_iters = outer;
    };

    if (run->parsed()) {
        finish_options(run);
        return cmd_run(opt, std::cerr);
    }
    if (replay->parsed()) {
        finish_options(replay);
        return cmd_replay(measurements, opt, std::cerr);
    }
    if (oracle->parsed()) return cmd_oracle(case_path, oracle_out, std::cerr);
    if (defaults->parsed()) {
        const std::string text = scenario_to_yaml(corridor ? corridor_scenario() : default_scenario());
        if (defaults_out == "-") {
            std::cout << text;
            return 0;
        }
        try {
            write_file(defaults_out, text);
        } catch (const std::exception& ex) {
            std::cerr << "error: " << ex.what() << '\n';
            return 1;
        }
    }
    return 0;
}

}  // namespace syncslam
