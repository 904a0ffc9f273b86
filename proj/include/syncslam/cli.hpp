#pragma once

#include "syncslam/engine.hpp"
#include "syncslam/eval.hpp"
#include "syncslam/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace syncslam {

/// Everything produced by one simulated run.
struct RunArtifacts {
    ScenarioConfig config;  // resolved
    GroundTruth truth;
    MeasurementLog measurements;
    std::vector<Estimates> estimates;  // steps 1..N
    MetricsReport metrics;
};

/// Runs the engine over a measurement log. Truth only seeds the priors.
[[nodiscard]] std::vector<Estimates> run_engine(const ScenarioConfig& cfg, const GroundTruth& truth,
                                                const MeasurementLog& log, std::size_t threads = 1);

/// Trajectories, measurements, engine and metrics for one scenario.
[[nodiscard]] RunArtifacts simulate_and_estimate(const ScenarioConfig& cfg, std::size_t threads = 1);

struct RunOptions {
    std::optional<std::string> scenario_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::size_t threads = 1;
    bool no_prune = false;
    std::optional<std::size_t> outer_iters;
};

int cmd_run(const RunOptions& opt, std::ostream& log);
int cmd_replay(const std::string& measurements_path, const RunOptions& opt, std::ostream& log);
int cmd_oracle(const std::string& case_path, const std::string& out_path, std::ostream& log);

/// Entry point of the `syncslam` executable.
int run_cli(int argc, char** argv);

}  // namespace syncslam
