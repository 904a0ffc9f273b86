#pragma once

#include "syncslam/geometry.hpp"
#include "syncslam/model.hpp"
#include "syncslam/synth.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <vector>

namespace syncslam {

using Mat4 = Eigen::Matrix4d;

/// Constants shared by every likelihood-ratio evaluation.
struct RatioParams {
    double p_d = 0.95;
    double mu_fp = 1.0;
    double d_max = 100.0;
    double gate_chi2 = 0.0;  // 0 disables the gate
};

/// Uniform FP density over [0, d_max] x [-pi, pi) x [-pi, pi).
[[nodiscard]] double fp_density(double d_max);

/// Measurement standard deviations evaluated at the measured amplitude and angles.
[[nodiscard]] NoiseStddevs measurement_sigmas(const Measurement& z, const NoiseConfig& noise);

/// Gaussian summary of a feature position.
struct FeatureMoments {
    Vec2 mean{0.0, 0.0};
    Mat2 cov = Mat2::Zero();
};

struct ScalarMoments {
    double mean = 0.0;
    double var = 0.0;
};

/// Gaussian summary of an MT belief over (px, py, orientation, bias).
struct MtMoments {
    MtState mean;
    Mat4 cov = Mat4::Zero();
};

[[nodiscard]] ScalarMoments moments(const ScalarBelief& b);
[[nodiscard]] FeatureMoments moments(const PositionBelief& b);
[[nodiscard]] MtMoments moments(const MtBelief& b);

/// p_d * f(z | feature, mt, b_bs) / (mu_fp * f_fp(z)) for one MT configuration.
/// Uncertain partners enter through first-order variance inflation; `mt_cov` may be null.
[[nodiscard]] double path_ratio(const FeatureMoments& feature, const MtState& mt, const Mat4* mt_cov,
                                const ScalarMoments& b_bs, const Measurement& z, const NoiseStddevs& s,
                                const RatioParams& rp);

/// Deterministic weighted subsample of MT particles used for Monte-Carlo expectations.
struct MtSample {
    std::vector<std::size_t> index;
    std::vector<double> weight;  // normalized
};
[[nodiscard]] MtSample subsample(const MtBelief& b, std::size_t max_samples);

/// beta row of a BS anchor; entry 0 is 1 - p_d.
[[nodiscard]] std::vector<double> beta_bs(const MtBelief& mt, const MtSample& sample, const BaseStation& bs,
                                          const ScalarMoments& bias, const std::vector<Measurement>& z,
                                          const std::vector<NoiseStddevs>& sigmas, const RatioParams& rp);

/// beta row of a legacy PVA; entry 0 is r (1 - p_d) + (1 - r).
[[nodiscard]] std::vector<double> beta_legacy(const MtBelief& mt, const MtSample& sample, double existence,
                                              const FeatureMoments& pva, const ScalarMoments& bias,
                                              const std::vector<Measurement>& z,
                                              const std::vector<NoiseStddevs>& sigmas, const RatioParams& rp);

/// xi(0) when the birth density pushes forward to the FP density: 1 + mu_n / mu_fp.
[[nodiscard]] double xi_new(double mu_n, double mu_fp);

/// xi(0) = 1 + mu_n / (J mu_fp) * sum_j w_j with per-BS birth weights.
[[nodiscard]] double xi_new_weighted(double mu_n, double mu_fp, const std::vector<double>& birth_weights);

/// Monte-Carlo xi(0): births drawn so that their measurement-space image is f_fp.
[[nodiscard]] double xi_new_mc(const Measurement& z, const NoiseStddevs& s, double mu_n, double mu_fp, double d_max,
                               std::size_t samples, Rng& rng);

/// Feature rows first the J BS anchors, then legacy PVAs. beta[r][0] is the
/// missed-detection entry and beta[r][m] the ratio for measurement m (1-based).
struct AssociationProblem {
    std::size_t J = 0;
    std::vector<std::vector<double>> beta;          // [R][M+1]
    std::vector<double> xi;                          // [M]
    std::vector<std::vector<double>> birth_weights;  // optional [M][J]

    [[nodiscard]] std::size_t rows() const { return beta.size(); }
    [[nodiscard]] std::size_t measurements() const { return xi.size(); }
};

struct AssociationMarginals {
    std::vector<std::vector<double>> p_underline;  // [R][M+1]
    std::vector<std::vector<double>> p_overline;   // [M][R+1], last entry = no existing feature
    std::vector<std::vector<double>> p_source;     // [M][J]
    std::vector<std::vector<double>> nu;           // [M][R] extrinsic measurement-to-feature messages
    std::vector<std::vector<double>> mu;           // [R][M] extrinsic feature-to-measurement messages
    bool converged = true;
    std::size_t iterations = 0;
};

/// Throws std::invalid_argument on shape errors or negative entries.
void validate(const AssociationProblem& p);

/// Loopy BP over the feature- and measurement-oriented association variables.
[[nodiscard]] AssociationMarginals da_bp(const AssociationProblem& p, std::size_t max_iters, double tol);

/// Brute-force marginals over all consistent associations. Rows and measurements are limited to 6.
[[nodiscard]] AssociationMarginals da_exact(const AssociationProblem& p);

/// p(j | measurement m is new) from per-BS birth weights; uniform if all vanish.
[[nodiscard]] std::vector<double> source_posterior(const std::vector<double>& birth_weights);

}  // namespace syncslam
