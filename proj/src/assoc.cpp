#include "syncslam/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace syncslam {

double fp_density(double d_max) {
    if (!(d_max > 0.0)) throw std::invalid_argument("fp_density: d_max must be positive");
    return 1.0 / (d_max * kTwoPi * kTwoPi);
}

NoiseStddevs measurement_sigmas(const Measurement& z, const NoiseConfig& noise) {
    return noise_stddevs(z.z_u, z.z_phi, z.z_theta, noise);
}

ScalarMoments moments(const ScalarBelief& b) {
    ScalarMoments m;
    for (std::size_t k = 0; k < b.count(); ++k) m.mean += b.weights[k] * b.particles[k];
    for (std::size_t k = 0; k < b.count(); ++k) {
        const double e = b.particles[k] - m.mean;
        m.var += b.weights[k] * e * e;
    }
    return m;
}

FeatureMoments moments(const PositionBelief& b) {
    FeatureMoments m;
    for (std::size_t k = 0; k < b.count(); ++k) m.mean += b.weights[k] * b.particles[k];
    for (std::size_t k = 0; k < b.count(); ++k) {
        const Vec2 e = b.particles[k] - m.mean;
        m.cov += b.weights[k] * e * e.transpose();
    }
    return m;
}

MtMoments moments(const MtBelief& b) {
    MtMoments m;
    m.mean.position.setZero();
    m.mean.velocity.setZero();
    double c = 0.0, s = 0.0;
    for (std::size_t k = 0; k < b.count(); ++k) {
        const MtState& x = b.particles[k];
        const double w = b.weights[k];
        m.mean.position += w * x.position;
        m.mean.velocity += w * x.velocity;
        m.mean.bias += w * x.bias;
        c += w * std::cos(x.orientation);
        s += w * std::sin(x.orientation);
    }
    m.mean.orientation = wrap_angle(std::atan2(s, c));
    for (std::size_t k = 0; k < b.count(); ++k) {
        const MtState& x = b.particles[k];
        Eigen::Vector4d e;
        e << x.position.x() - m.mean.position.x(), x.position.y() - m.mean.position.y(),
            wrap_angle(x.orientation - m.mean.orientation), x.bias - m.mean.bias;
        m.cov += b.weights[k] * e * e.transpose();
    }
    return m;
}

double path_ratio(const FeatureMoments& feature, const MtState& mt, const Mat4* mt_cov, const ScalarMoments& b_bs,
                  const Measurement& z, const NoiseStddevs& s, const RatioParams& rp) {
    const Vec2 diff = feature.mean - mt.position;
    const double d = diff.norm();
    if (!(d > 1e-9)) return 0.0;
    const Vec2 u = diff / d;
    const Vec2 perp{-u.y(), u.x()};
    const double a = std::atan2(diff.y(), diff.x());

    double var_d = s.d * s.d + u.dot(feature.cov * u) + b_bs.var;
    const double var_ang = perp.dot(feature.cov * perp) / (d * d);
    double var_phi = s.phi * s.phi + var_ang;
    double var_theta = s.theta * s.theta + var_ang;
    if (mt_cov) {
        Eigen::Vector4d g_d{-u.x(), -u.y(), 0.0, -1.0};
        Eigen::Vector4d g_phi{-perp.x() / d, -perp.y() / d, -1.0, 0.0};
        Eigen::Vector4d g_theta{-perp.x() / d, -perp.y() / d, 0.0, 0.0};
        var_d += g_d.dot(*mt_cov * g_d);
        var_phi += g_phi.dot(*mt_cov * g_phi);
        var_theta += g_theta.dot(*mt_cov * g_theta);
    }

    const double r_d = z.z_d - biased_distance(d, b_bs.mean, mt.bias);
    const double r_phi = wrap_angle(z.z_phi - (a - mt.orientation));
    const double r_theta = wrap_angle(z.z_theta - (a + kPi));
    const double chi2 = r_d * r_d / var_d + r_phi * r_phi / var_phi + r_theta * r_theta / var_theta;
    if (rp.gate_chi2 > 0.0 && chi2 > rp.gate_chi2) return 0.0;

    const double norm = std::pow(kTwoPi, 1.5) * std::sqrt(var_d * var_phi * var_theta);
    const double lik = std::max(std::exp(-0.5 * chi2) / norm, 1e-300);
    return rp.p_d * lik / (rp.mu_fp * fp_density(rp.d_max));
}

MtSample subsample(const MtBelief& b, std::size_t max_samples) {
    MtSample s;
    const std::size_t n = b.count();
    if (n == 0) return s;
    const std::size_t k = std::min(n, std::max<std::size_t>(1, max_samples));
    s.index.resize(k);
    s.weight.resize(k);
    double total = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
        s.index[t] = k == n ? t : static_cast<std::size_t>((static_cast<double>(t) + 0.5) * n / k);
        s.weight[t] = b.weights[s.index[t]];
        total += s.weight[t];
    }
    for (double& w : s.weight) w = total > 0.0 ? w / total : 1.0 / k;
    return s;
}

namespace {

std::vector<double> expected_ratios(const MtBelief& mt, const MtSample& sample, const FeatureMoments& feature,
                                    const ScalarMoments& bias, const std::vector<Measurement>& z,
                                    const std::vector<NoiseStddevs>& sigmas, const RatioParams& rp) {
    std::vector<double> out(z.size() + 1, 0.0);
    for (std::size_t m = 0; m < z.size(); ++m) {
        double acc = 0.0;
        for (std::size_t t = 0; t < sample.index.size(); ++t)
            acc += sample.weight[t] *
                   path_ratio(feature, mt.particles[sample.index[t]], nullptr, bias, z[m], sigmas[m], rp);
        out[m + 1] = acc;
    }
    return out;
}

}  // namespace

std::vector<double> beta_bs(const MtBelief& mt, const MtSample& sample, const BaseStation& bs,
                            const ScalarMoments& bias, const std::vector<Measurement>& z,
                            const std::vector<NoiseStddevs>& sigmas, const RatioParams& rp) {
    std::vector<double> row = expected_ratios(mt, sample, {bs.position, Mat2::Zero()}, bias, z, sigmas, rp);
    row[0] = 1.0 - rp.p_d;
    return row;
}

std::vector<double> beta_legacy(const MtBelief& mt, const MtSample& sample, double existence,
                                const FeatureMoments& pva, const ScalarMoments& bias,
                                const std::vector<Measurement>& z, const std::vector<NoiseStddevs>& sigmas,
                                const RatioParams& rp) {
    std::vector<double> row(z.size() + 1, 0.0);
    if (existence > 0.0) {
        row = expected_ratios(mt, sample, pva, bias, z, sigmas, rp);
        for (std::size_t m = 1; m < row.size(); ++m) row[m] *= existence;
    }
    row[0] = existence * (1.0 - rp.p_d) + (1.0 - existence);
    return row;
}

double xi_new(double mu_n, double mu_fp) { return 1.0 + mu_n / mu_fp; }

double xi_new_weighted(double mu_n, double mu_fp, const std::vector<double>& birth_weights) {
    if (birth_weights.empty()) return 1.0;
    double s = 0.0;
    for (double w : birth_weights) s += w;
    return 1.0 + mu_n / (static_cast<double>(birth_weights.size()) * mu_fp) * s;
}

double xi_new_mc(const Measurement& z, const NoiseStddevs& s, double mu_n, double mu_fp, double d_max,
                 std::size_t samples, Rng& rng) {
    if (samples == 0) throw std::invalid_argument("xi_new_mc: need at least one sample");
    // angles always fall inside the FP support, so only the distance is sampled
    std::size_t inside = 0;
    for (std::size_t k = 0; k < samples; ++k) {
        const double y = z.z_d + gaussian(rng, s.d);
        if (y >= 0.0 && y <= d_max) ++inside;
    }
    return 1.0 + mu_n / mu_fp * static_cast<double>(inside) / static_cast<double>(samples);
}

void validate(const AssociationProblem& p) {
    const std::size_t M = p.measurements();
    if (p.J > p.rows()) throw std::invalid_argument("association: J exceeds the number of rows");
    for (const auto& row : p.beta) {
        if (row.size() != M + 1) throw std::invalid_argument("association: beta rows need M+1 entries");
        for (double b : row)
            if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("association: beta must be >= 0");
    }
    for (double x : p.xi)
        if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("association: xi must be > 0");
    if (!p.birth_weights.empty()) {
        if (p.birth_weights.size() != M) throw std::invalid_argument("association: birth_weights needs M rows");
        for (const auto& w : p.birth_weights)
            if (w.size() != p.J) throw std::invalid_argument("association: birth_weights rows need J entries");
    }
}

std::vector<double> source_posterior(const std::vector<double>& birth_weights) {
    std::vector<double> p(birth_weights.size(), 0.0);
    if (p.empty()) return p;
    double s = 0.0;
    for (double w : birth_weights) s += std::max(w, 0.0);
    for (std::size_t j = 0; j < p.size(); ++j)
        p[j] = s > 0.0 ? std::max(birth_weights[j], 0.0) / s : 1.0 / static_cast<double>(p.size());
    return p;
}

namespace {

void normalize(std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    if (s > 0.0)
        for (double& x : v) x /= s;
}

void fill_source(const AssociationProblem& p, AssociationMarginals& out) {
    out.p_source.assign(p.measurements(), std::vector<double>(p.J, p.J ? 1.0 / static_cast<double>(p.J) : 0.0));
    if (p.birth_weights.empty()) return;
    for (std::size_t m = 0; m < p.measurements(); ++m) out.p_source[m] = source_posterior(p.birth_weights[m]);
}

}  // namespace

AssociationMarginals da_bp(const AssociationProblem& p, std::size_t max_iters, double tol) {
    validate(p);
    const std::size_t R = p.rows();
    const std::size_t M = p.measurements();
    AssociationMarginals out;
    out.nu.assign(M, std::vector<double>(R, 1.0));
    out.mu.assign(R, std::vector<double>(M, 0.0));

    auto update_mu = [&] {
        for (std::size_t r = 0; r < R; ++r) {
            const auto& b = p.beta[r];
            double s = b[0];
            for (std::size_t m = 0; m < M; ++m) s += b[m + 1] * out.nu[m][r];
            for (std::size_t m = 0; m < M; ++m) {
                const double den = s - b[m + 1] * out.nu[m][r];
                out.mu[r][m] = den > 0.0 ? b[m + 1] / den : 0.0;
            }
        }
    };

    out.converged = R == 0 || M == 0;
    double prev_delta = std::numeric_limits<double>::infinity();
    bool damping = false;
    std::vector<std::vector<double>> fresh(M, std::vector<double>(R, 1.0));
    for (std::size_t it = 0; it < max_iters && !out.converged; ++it) {
        update_mu();
        double delta = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            double t = p.xi[m];
            for (std::size_t r = 0; r < R; ++r) t += out.mu[r][m];
            for (std::size_t r = 0; r < R; ++r) fresh[m][r] = 1.0 / (t - out.mu[r][m]);
        }
        for (std::size_t m = 0; m < M; ++m) {
            for (std::size_t r = 0; r < R; ++r) {
                const double v = damping ? 0.5 * (out.nu[m][r] + fresh[m][r]) : fresh[m][r];
                delta = std::max(delta, std::abs(v - out.nu[m][r]));
                out.nu[m][r] = v;
            }
        }
        out.iterations = it + 1;
        if (delta < tol) out.converged = true;
        if (it > 1 && delta >= prev_delta) damping = true;
        prev_delta = delta;
    }
    update_mu();

    out.p_underline.assign(R, std::vector<double>(M + 1, 0.0));
    for (std::size_t r = 0; r < R; ++r) {
        out.p_underline[r][0] = p.beta[r][0];
        for (std::size_t m = 0; m < M; ++m) out.p_underline[r][m + 1] = p.beta[r][m + 1] * out.nu[m][r];
        normalize(out.p_underline[r]);
    }
    out.p_overline.assign(M, std::vector<double>(R + 1, 0.0));
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t r = 0; r < R; ++r) out.p_overline[m][r] = out.mu[r][m];
        out.p_overline[m][R] = p.xi[m];
        normalize(out.p_overline[m]);
    }
    fill_source(p, out);
    return out;
}

AssociationMarginals da_exact(const AssociationProblem& p) {
    validate(p);
    const std::size_t R = p.rows();
    const std::size_t M = p.measurements();
    if (R > 6 || M > 6) throw std::invalid_argument("da_exact: at most 6 rows and 6 measurements");

    AssociationMarginals out;
    out.p_underline.assign(R, std::vector<double>(M + 1, 0.0));
    out.p_overline.assign(M, std::vector<double>(R + 1, 0.0));
    std::vector<std::size_t> assign(R, 0);
    std::vector<bool> used(M, false);
    double total = 0.0;

    std::function<void(std::size_t, double)> recurse = [&](std::size_t r, double w) {
        if (w == 0.0) return;
        if (r == R) {
            double full = w;
            for (std::size_t m = 0; m < M; ++m)
                if (!used[m]) full *= p.xi[m];
            total += full;
            for (std::size_t k = 0; k < R; ++k) out.p_underline[k][assign[k]] += full;
            std::vector<std::size_t> owner(M, R);
            for (std::size_t k = 0; k < R; ++k)
                if (assign[k] > 0) owner[assign[k] - 1] = k;
            for (std::size_t m = 0; m < M; ++m) out.p_overline[m][owner[m]] += full;
            return;
        }
        assign[r] = 0;
        recurse(r + 1, w * p.beta[r][0]);
        for (std::size_t m = 0; m < M; ++m) {
            if (used[m]) continue;
            used[m] = true;
            assign[r] = m + 1;
            recurse(r + 1, w * p.beta[r][m + 1]);
            used[m] = false;
        }
        assign[r] = 0;
    };
    recurse(0, 1.0);

    if (total > 0.0) {
        for (auto& row : out.p_underline)
            for (double& x : row) x /= total;
        for (auto& row : out.p_overline)
            for (double& x : row) x /= total;
    }
    out.nu.assign(M, std::vector<double>(R, 0.0));
    out.mu.assign(R, std::vector<double>(M, 0.0));
    fill_source(p, out);
    return out;
}

}  // namespace syncslam
