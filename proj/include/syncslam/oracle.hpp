#pragma once

#include "syncslam/scenario.hpp"

#include <cstddef>
#include <vector>

namespace syncslam {

/// 1-D toy corridor: one BS, no walls, one MT moving along x with known velocity,
/// orientation and clock biases. Only the initial x is uncertain.
[[nodiscard]] ScenarioConfig corridor_scenario();

/// Grid posterior of the MT x coordinate per step (index n-1 holds step n).
struct GridPosterior {
    std::vector<double> grid;  // initial-x grid
    std::vector<double> mean;
    std::vector<double> stddev;
};

/// Exact Bayes filter on a grid over the initial x. Uses the known truth for everything
/// except x and evaluates the single-feature PDA likelihood with Poisson clutter.
[[nodiscard]] GridPosterior corridor_grid_filter(const ScenarioConfig& cfg, const GroundTruth& truth,
                                                 const MeasurementLog& z, std::size_t grid_points = 200001);

}  // namespace syncslam
