#include "syncslam/model.hpp"

#include <cmath>
#include <stdexcept>

namespace syncslam {

void validate(const EngineConfig& cfg) {
    auto prob = [](double p, const char* name) {
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument(std::string("engine: ") + name + " must be in (0,1)");
    };
    prob(cfg.p_d, "p_d");
    prob(cfg.p_s, "p_s");
    prob(cfg.p_cf, "p_cf");
    prob(cfg.p_pr, "p_pr");
    if (!(cfg.p_pr < cfg.p_cf)) throw std::invalid_argument("engine: p_pr must be below p_cf");
    if (cfg.mu_n < 0.0) throw std::invalid_argument("engine: mu_n must be >= 0");
    if (!(cfg.mu_fp > 0.0)) throw std::invalid_argument("engine: mu_fp must be > 0");
    if (cfg.particles_mt == 0 || cfg.particles_pva == 0 || cfg.particles_bias == 0)
        throw std::invalid_argument("engine: particle counts must be positive");
    if (cfg.da_max_iters == 0) throw std::invalid_argument("engine: da_max_iters must be positive");
    if (cfg.outer_iters == 0) throw std::invalid_argument("engine: outer_iters must be positive");
    if (!(cfg.bias_prior_floor >= 0.0 && cfg.bias_prior_floor < 1.0))
        throw std::invalid_argument("engine: bias_prior_floor must be in [0,1)");
    if (!(cfg.bias_proposal_sigma > 0.0)) throw std::invalid_argument("engine: bias_proposal_sigma must be > 0");
}

MtBelief predict_mt(MtBelief belief, double dt, const EngineConfig& cfg, Rng& rng) {
    for (MtState& s : belief.particles) {
        const Vec2 a{gaussian(rng, cfg.accel_sigma), gaussian(rng, cfg.accel_sigma)};
        s.position += s.velocity * dt + 0.5 * a * dt * dt;
        s.velocity += a * dt;
        s.orientation = wrap_angle(s.orientation + gaussian(rng, cfg.orientation_sigma));
        s.bias += gaussian(rng, cfg.bias_sigma_mt);
    }
    return belief;
}

ScalarBelief predict_bias_bs(ScalarBelief belief, const EngineConfig& cfg, Rng& rng) {
    for (double& b : belief.particles) b += gaussian(rng, cfg.bias_sigma_bs);
    return belief;
}

PvaHypothesis predict_pva(PvaHypothesis h, const EngineConfig& cfg) {
    h.existence *= cfg.p_s;
    return h;
}

PvaHypothesis inter_mt_transition(PvaHypothesis h) { return h; }

std::vector<std::size_t> systematic_resample(const std::vector<double>& weights, std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    if (weights.empty() || n == 0) return idx;
    double total = 0.0;
    for (double w : weights) total += w;
    const double step = total / static_cast<double>(n);
    double u = uniform(rng, 0.0, step);
    double cum = weights[0];
    std::size_t k = 0;
    for (std::size_t s = 0; s < n; ++s) {
        while (u > cum && k + 1 < weights.size()) cum += weights[++k];
        idx[s] = k;
        u += step;
    }
    return idx;
}

std::string to_string(BiasPriorMode m) { return m == BiasPriorMode::kTruth ? "truth" : "uniform"; }

BiasPriorMode bias_prior_from_string(const std::string& s) {
    if (s == "uniform") return BiasPriorMode::kUniform;
    if (s == "truth") return BiasPriorMode::kTruth;
    throw std::invalid_argument("unknown bias prior mode: " + s);
}

}  // namespace syncslam
