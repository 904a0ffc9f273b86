#pragma once

#include "syncslam/geometry.hpp"
#include "syncslam/rng.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace syncslam {

/// MT kinematic state plus MT clock bias (meters).
struct MtState {
    Vec2 position{0.0, 0.0};
    double orientation = 0.0;
    Vec2 velocity{0.0, 0.0};
    double bias = 0.0;
};

/// Weighted particle set. Weights are kept normalized by the operations in this library.
template <typename S>
struct ParticleBelief {
    std::vector<S> particles;
    std::vector<double> weights;

    [[nodiscard]] std::size_t count() const { return particles.size(); }

    void set_uniform() { weights.assign(particles.size(), particles.empty() ? 0.0 : 1.0 / particles.size()); }

    /// Normalizes weights; falls back to uniform when all weights vanish.
    void normalize() {
        double s = 0.0;
        for (double w : weights) s += w;
        if (!(s > 0.0) || !std::isfinite(s)) {
            set_uniform();
            return;
        }
        for (double& w : weights) w /= s;
    }

    [[nodiscard]] double effective_sample_size() const {
        double s2 = 0.0;
        for (double w : weights) s2 += w * w;
        return s2 > 0.0 ? 1.0 / s2 : 0.0;
    }
};

using MtBelief = ParticleBelief<MtState>;
using ScalarBelief = ParticleBelief<double>;
using PositionBelief = ParticleBelief<Vec2>;

/// Potential virtual anchor: position belief, existence probability and the BS it
/// was created for. `bs_index` is fixed at creation and survives pruning.
struct PvaHypothesis {
    std::uint64_t key = 0;      // creation ordinal, 1-based, never reused
    std::size_t bs_index = 1;   // 1-based
    PositionBelief position_belief;
    double existence = 0.0;
    bool confirmed = false;
};

/// One scalar belief per BS, index j-1.
struct BsBiasBelief {
    std::vector<ScalarBelief> per_bs;
};

enum class BiasPriorMode { kUniform, kTruth };

struct EngineConfig {
    double p_d = 0.95;
    double p_s = 0.999;
    double mu_n = 0.05;
    double mu_fp = 1.0;
    double p_cf = 0.5;
    double p_pr = 1e-4;
    std::size_t particles_mt = 5000;
    std::size_t particles_pva = 2000;
    std::size_t particles_bias = 1000;
    std::size_t da_max_iters = 200;
    double da_tol = 1e-9;
    std::size_t outer_iters = 1;

    // process noise
    double accel_sigma = 0.05;        // m/s^2
    double orientation_sigma = 0.02;  // rad per step
    double bias_sigma_mt = 0.02;      // m per step
    double bias_sigma_bs = 0.02;      // m per step

    // priors
    double prior_pos_sigma_x = 1.0;
    double prior_pos_sigma_y = 1.0;
    double prior_vel_sigma = 0.1;
    double prior_orientation_sigma = 0.1;
    BiasPriorMode bias_prior = BiasPriorMode::kUniform;

    // particle hygiene
    double resample_ess_fraction = 0.5;
    double jitter_scale = 0.1;
    bool jitter_position = true;
    bool jitter_orientation = true;
    bool jitter_bias = true;

    // numerics
    std::size_t beta_samples = 1000;  // MT particles used per beta entry
    double gate_chi2 = 100.0;         // pre-gate on the moment-matched residual
    double bias_sharp_std = 0.5;      // below this a bias belief counts as initialized
    double bias_proposal_sigma = 0.3; // spread of measurement-driven bias proposals
    double bias_prior_floor = 1e-2;   // uniform share kept in the prior of a broad, informed bias
    bool prune = true;
};

/// Checks config invariants; throws std::invalid_argument.
void validate(const EngineConfig& cfg);

[[nodiscard]] MtBelief predict_mt(MtBelief belief, double dt, const EngineConfig& cfg, Rng& rng);
[[nodiscard]] ScalarBelief predict_bias_bs(ScalarBelief belief, const EngineConfig& cfg, Rng& rng);
[[nodiscard]] PvaHypothesis predict_pva(PvaHypothesis h, const EngineConfig& cfg);
/// Identity hand-over of a hypothesis between sequential MT updates.
[[nodiscard]] PvaHypothesis inter_mt_transition(PvaHypothesis h);

/// Systematic resampling; returns selected indices (size n).
[[nodiscard]] std::vector<std::size_t> systematic_resample(const std::vector<double>& weights, std::size_t n,
                                                           Rng& rng);

std::string to_string(BiasPriorMode m);
BiasPriorMode bias_prior_from_string(const std::string& s);

}  // namespace syncslam
