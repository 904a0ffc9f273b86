#pragma once

#include "syncslam/geometry.hpp"
#include "syncslam/model.hpp"
#include "syncslam/synth.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace syncslam {

/// Turn rate (rad/s) applied from `start_step` on, until the next segment starts.
struct TurnSegment {
    std::size_t start_step = 0;
    double turn_rate = 0.0;

    bool operator==(const TurnSegment&) const = default;
};

struct MtInit {
    Vec2 position{0.0, 0.0};
    double orientation = 0.0;  // initial heading, rad
    double speed = 0.0;        // m/s
    std::vector<TurnSegment> turn_schedule;
};

/// Ground-truth clock model. Biases are in meters.
struct TruthConfig {
    std::pair<double, double> bs_bias_range{0.0, 30.0};
    std::pair<double, double> mt_bias_range{-30.0, 0.0};
    double bias_offset = 0.0;  // common shift of every true and prior bias
    double bias_walk_sigma_bs = 0.01;
    double bias_walk_sigma_mt = 0.01;
};

struct ScenarioConfig {
    std::vector<Wall> walls;
    std::vector<BaseStation> base_stations;
    std::vector<MtInit> mts;
    std::size_t n_steps = 50;
    double dt = 1.0;
    Visibility visibility = Visibility::kNone;
    TruthConfig truth{};
    NoiseConfig noise{};
    EngineConfig engine{};
    std::uint64_t seed = 1;
};

/// Ground truth of one run. Time index n runs 0..n_steps; n = 0 is the initial state
/// and measurements exist for n >= 1.
struct GroundTruth {
    std::vector<VirtualAnchor> vas;
    std::vector<std::vector<MtState>> mt;         // [n][i]
    std::vector<std::vector<double>> bs_bias;     // [n][j]
    std::vector<std::vector<std::vector<OriginLabel>>> labels;  // [n][i][m]
};

/// Measurement sets keyed by (n, i); index 0 in n is unused.
using MeasurementLog = std::vector<std::vector<std::vector<Measurement>>>;

/// Throws std::invalid_argument on an invalid scenario.
void validate(const ScenarioConfig& cfg);

/// Desk-scale default: three walls, two BSs, two MTs, 50 steps.
[[nodiscard]] ScenarioConfig default_scenario();

/// d_max actually used for the FP density support (resolves the 0 default).
[[nodiscard]] double resolved_d_max(const ScenarioConfig& cfg);

/// Copy of the config with derived defaults filled in.
[[nodiscard]] ScenarioConfig resolve(ScenarioConfig cfg);

/// One VA per (BS, wall), BS-major and wall-minor.
[[nodiscard]] std::vector<VirtualAnchor> build_environment(const ScenarioConfig& cfg);

[[nodiscard]] GroundTruth generate_trajectories(const ScenarioConfig& cfg, Rng& rng);

/// Convenience: trajectories from the scenario's own seed stream.
[[nodiscard]] GroundTruth generate_trajectories(const ScenarioConfig& cfg);

/// Synthesizes all measurement sets, one RNG stream per (n, i); fills truth.labels.
[[nodiscard]] MeasurementLog simulate_measurements(const ScenarioConfig& cfg, GroundTruth& truth);

// Canonical YAML config I/O.
[[nodiscard]] ScenarioConfig scenario_from_yaml(const std::string& text);
[[nodiscard]] std::string scenario_to_yaml(const ScenarioConfig& cfg);
[[nodiscard]] ScenarioConfig load_scenario(const std::string& path);
void save_scenario(const ScenarioConfig& cfg, const std::string& path);

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

}  // namespace syncslam
