#pragma once

#include "syncslam/geometry.hpp"
#include "syncslam/model.hpp"
#include "syncslam/rng.hpp"

#include <string>
#include <vector>

namespace syncslam {

/// MPC parameter estimate delivered by the channel estimator.
struct Measurement {
    double z_d = 0.0;      // biased distance, m
    double z_phi = 0.0;    // AoA, rad, MT body frame
    double z_theta = 0.0;  // AoD, rad, global frame
    double z_u = 0.0;      // normalized amplitude
};

/// Uniform linear array along the device x-axis.
struct ArrayConfig {
    std::size_t elements = 9;
    double spacing = 0.5;  // wavelengths
};

enum class AmplitudeMode { kDeterministic, kRician };
enum class Visibility { kNone, kSegment };

struct NoiseConfig {
    double beta_bw = 100e6;  // Hz
    ArrayConfig array_mt{};
    ArrayConfig array_bs{};
    double snr_ref_db = 30.0;
    double d_ref = 1.0;
    double gamma = 1.0;
    double p_d = 0.95;
    double mu_fp = 1.0;
    double d_max = 0.0;  // 0 selects the scenario-derived default
    double d2_floor = 1e-4;
    double fp_amplitude_factor = 2.0;  // FP amplitudes in [gamma, factor * gamma]
    AmplitudeMode amplitude_mode = AmplitudeMode::kDeterministic;
};

struct NoiseStddevs {
    double d = 0.0;
    double phi = 0.0;
    double theta = 0.0;
};

/// Origin of a synthesized measurement. bs_id == 0 marks a false positive;
/// feature 0 is the LOS path, feature w the reflection at wall w.
struct OriginLabel {
    std::size_t bs_id = 0;
    std::size_t feature = 0;

    [[nodiscard]] bool is_false_positive() const { return bs_id == 0; }
    bool operator==(const OriginLabel&) const = default;
};

/// Amplitude sqrt(SNR) with free-space decay relative to the reference distance.
[[nodiscard]] double amplitude_from_distance(double d, const NoiseConfig& cfg);

/// Normalized squared aperture of a ULA, clamped below by `floor`.
[[nodiscard]] double aperture_sq(double angle, const ArrayConfig& array, double floor);

/// Fisher-information standard deviations for distance, AoA and AoD.
[[nodiscard]] NoiseStddevs noise_stddevs(double z_u, double aoa, double aod, const NoiseConfig& cfg);

/// Everything the synthesizer needs for one (time, MT) pair.
struct SynthInput {
    MtState mt;
    std::vector<BaseStation> base_stations;
    std::vector<double> bs_biases;  // per BS, meters
    std::vector<VirtualAnchor> vas;
    std::vector<Wall> walls;
    Visibility visibility = Visibility::kNone;
};

struct SynthOutput {
    std::vector<Measurement> measurements;
    std::vector<OriginLabel> labels;
};

/// Superposed, unlabeled measurement set of one MT: detections of every BS feature,
/// Poisson false positives, random order. Labels are aligned with the permuted list.
[[nodiscard]] SynthOutput synthesize(const SynthInput& in, const NoiseConfig& cfg, Rng& rng);

std::string to_string(AmplitudeMode m);
AmplitudeMode amplitude_mode_from_string(const std::string& s);
std::string to_string(Visibility v);
Visibility visibility_from_string(const std::string& s);

}  // namespace syncslam
