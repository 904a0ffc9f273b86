#pragma once

#include "syncslam/engine.hpp"
#include "syncslam/scenario.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace syncslam {

/// RMSE of (b_bs_j - b_mt_i) over all (j, i) pairs.
[[nodiscard]] double bias_difference_rmse(const std::vector<double>& est_bs, const std::vector<double>& est_mt,
                                          const std::vector<double>& true_bs, const std::vector<double>& true_mt);

/// Minimum-cost assignment for a rows x cols matrix with rows <= cols. Entry r holds the column of row r.
[[nodiscard]] std::vector<std::size_t> hungarian(const Eigen::MatrixXd& cost);

struct OspaResult {
    double total = 0.0;
    double localization = 0.0;
    double cardinality = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (estimate, truth) pairs closer than c
};

[[nodiscard]] OspaResult ospa(const std::vector<Vec2>& estimates, const std::vector<Vec2>& truth, double c = 2.0,
                              double p = 1.0);

struct SeparationResult {
    double accuracy = 0.0;  // NaN when nothing matched
    std::size_t matched = 0;
    std::size_t correct = 0;
};

/// Fraction of matched pairs whose estimated BS index equals the true one.
[[nodiscard]] SeparationResult separation_accuracy(const std::vector<std::pair<std::size_t, std::size_t>>& matches,
                                                   const std::vector<std::size_t>& est_bs,
                                                   const std::vector<std::size_t>& true_bs);

struct StepMetrics {
    std::size_t step = 0;
    double position_rmse = 0.0;
    double orientation_rmse = 0.0;
    double bias_difference_rmse = 0.0;
    double ospa = 0.0;
    double ospa_localization = 0.0;
    double ospa_cardinality = 0.0;
    double separation = 0.0;
    std::size_t matched = 0;
    std::size_t correct = 0;
    std::size_t confirmed = 0;
    std::size_t hypotheses = 0;
};

struct MetricsReport {
    std::vector<StepMetrics> steps;
};

/// Aggregates over the last `window` steps. RMSEs pool squared errors, OSPA is averaged and
/// separation pools matched pairs.
struct MetricsSummary {
    double position_rmse = 0.0;
    double bias_difference_rmse = 0.0;
    double ospa = 0.0;
    double separation = 0.0;
    std::size_t matched = 0;
};

struct EvalConfig {
    double ospa_c = 2.0;
    double ospa_p = 1.0;
};

[[nodiscard]] StepMetrics evaluate_step(const Estimates& est, const GroundTruth& truth, const EvalConfig& cfg = {});
[[nodiscard]] MetricsReport evaluate(const std::vector<Estimates>& est, const GroundTruth& truth,
                                     const EvalConfig& cfg = {});
[[nodiscard]] MetricsSummary summarize(const MetricsReport& report, std::size_t window = 10);

extern const char* const kMetricsCsvHeader;
[[nodiscard]] std::string metrics_csv(const MetricsReport& report);

}  // namespace syncslam
