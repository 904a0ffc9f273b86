#pragma once

#include "syncslam/engine.hpp"
#include "syncslam/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace syncslam {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kMeasurementsSchema = "syncslam.measurements";

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a(const std::string& bytes);

[[nodiscard]] std::string git_describe();

// truth.json
[[nodiscard]] std::string truth_to_json(const GroundTruth& truth);
[[nodiscard]] GroundTruth truth_from_json(const std::string& text);

// measurements.jsonl: a header line, then one line per (step, MT)
void write_measurements(std::ostream& os, const MeasurementLog& log);
/// Reads a measurement log for `n_mt` MTs and `n_steps` steps. An empty stream yields an
/// all-empty log. Throws std::runtime_error on schema or shape mismatch.
[[nodiscard]] MeasurementLog read_measurements(std::istream& is, std::size_t n_mt, std::size_t n_steps);

// estimates.jsonl: one object per (step, entity)
void write_estimates(std::ostream& os, const Estimates& est);

struct ManifestInfo {
    std::string command;
    std::uint64_t seed = 0;
    std::string scenario_yaml;
    std::size_t threads = 1;
    std::vector<std::string> files;
};
[[nodiscard]] std::string manifest_json(const ManifestInfo& info);

}  // namespace syncslam
