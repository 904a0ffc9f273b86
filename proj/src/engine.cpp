#include "syncslam/engine.hpp"

#include "syncslam/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace syncslam {

namespace {

constexpr std::uint64_t kBsTagBase = 1000;

double mid(const std::pair<double, double>& r) { return 0.5 * (r.first + r.second); }

template <typename S>
void apply_resample(ParticleBelief<S>& b, const std::vector<std::size_t>& idx) {
    std::vector<S> next;
    next.reserve(idx.size());
    for (std::size_t k : idx) next.push_back(b.particles[k]);
    b.particles = std::move(next);
    b.set_uniform();
}

/// Turns log-weights into normalized weights in place.
void normalize_log(std::vector<double>& logw, std::vector<double>& w) {
    double top = -std::numeric_limits<double>::infinity();
    for (double l : logw) top = std::max(top, l);
    w.resize(logw.size());
    if (!std::isfinite(top)) {
        std::fill(w.begin(), w.end(), logw.empty() ? 0.0 : 1.0 / static_cast<double>(logw.size()));
        return;
    }
    double s = 0.0;
    for (std::size_t k = 0; k < logw.size(); ++k) {
        w[k] = std::exp(logw[k] - top);
        s += w[k];
    }
    for (double& x : w) x /= s;
}

double log_or_floor(double x) { return x > 0.0 ? std::log(x) : -745.0; }

double normal_pdf(double x, double mean, double sigma) {
    const double e = (x - mean) / sigma;
    return std::exp(-0.5 * e * e) / (std::sqrt(kTwoPi) * sigma);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double std_of(const ScalarBelief& b) { return std::sqrt(moments(b).var); }

double std_of_mt_bias(const MtBelief& b) {
    double mean = 0.0, var = 0.0;
    for (std::size_t k = 0; k < b.count(); ++k) mean += b.weights[k] * b.particles[k].bias;
    for (std::size_t k = 0; k < b.count(); ++k) {
        const double e = b.particles[k].bias - mean;
        var += b.weights[k] * e * e;
    }
    return std::sqrt(var);
}

std::size_t draw_index(const std::vector<double>& cumulative, Rng& rng) {
    const double u = uniform(rng, 0.0, cumulative.back());
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::vector<double> cumulate(const std::vector<double>& w) {
    std::vector<double> c(w.size());
    std::partial_sum(w.begin(), w.end(), c.begin());
    return c;
}

/// Importance proposal for a clock bias that is not yet pinned down: a mixture of the
/// uniform prior support, a kernel density of the current belief and Gaussians around
/// measurement-implied candidates. draw() returns the sample and its prior/proposal ratio.
class BiasProposal {
public:
    BiasProposal(std::pair<double, double> support, bool informed, const std::vector<double>& particles,
                 const std::vector<double>& weights, double sigma, double floor)
        : lo_(support.first), hi_(support.second), informed_(informed), sigma_(sigma),
          floor_(hi_ > lo_ ? floor : 0.0) {
        const std::size_t n = particles.size();
        const std::size_t k = std::min<std::size_t>(n, 500);
        double mean = 0.0, var = 0.0, total = 0.0;
        for (std::size_t t = 0; t < k; ++t) {
            const std::size_t idx = k == n ? t : static_cast<std::size_t>((t + 0.5) * n / k);
            centers_.push_back(particles[idx]);
            center_w_.push_back(weights[idx]);
            total += weights[idx];
        }
        for (double& w : center_w_) w = total > 0.0 ? w / total : 1.0 / static_cast<double>(k);
        for (std::size_t t = 0; t < k; ++t) mean += center_w_[t] * centers_[t];
        for (std::size_t t = 0; t < k; ++t) var += center_w_[t] * (centers_[t] - mean) * (centers_[t] - mean);
        h_ = std::clamp(1.06 * std::sqrt(var) * std::pow(static_cast<double>(std::max<std::size_t>(k, 1)), -0.2), 1e-3,
                        sigma_);
        cum_ = cumulate(center_w_);
        const bool has_support = hi_ > lo_;
        const bool has_kde = informed_ && !centers_.empty();
        a_uniform_ = has_support ? (has_kde ? 0.1 : 0.5) : 0.0;
        a_kde_ = has_kde ? 0.45 : 0.0;
        a_cand_ = 1.0 - a_uniform_ - a_kde_;
    }

    [[nodiscard]] std::pair<double, double> draw(const std::vector<double>& cand, Rng& rng) const {
        const double u = uniform(rng, 0.0, 1.0);
        double b;
        if (u < a_uniform_)
            b = uniform(rng, lo_, hi_);
        else if (u < a_uniform_ + a_kde_ || cand.empty())
            b = centers_[draw_index(cum_, rng)] + gaussian(rng, h_);
        else
            b = cand[std::uniform_int_distribution<std::size_t>(0, cand.size() - 1)(rng)] + gaussian(rng, sigma_);
        double q = a_uniform_ * uniform_pdf(b) + a_kde_ * kde_pdf(b);
        if (!cand.empty()) {
            double mix = 0.0;
            for (double c : cand) mix += normal_pdf(b, c, sigma_);
            q += a_cand_ * mix / static_cast<double>(cand.size());
        }
        const double prior = informed_ ? (1.0 - floor_) * kde_pdf(b) + floor_ * uniform_pdf(b) : uniform_pdf(b);
        return {b, q > 0.0 ? prior / q : 0.0};
    }

private:
    [[nodiscard]] double uniform_pdf(double b) const { return hi_ > lo_ && b >= lo_ && b <= hi_ ? 1.0 / (hi_ - lo_) : 0.0; }

    [[nodiscard]] double kde_pdf(double b) const {
        double s = 0.0;
        for (std::size_t t = 0; t < centers_.size(); ++t) s += center_w_[t] * normal_pdf(b, centers_[t], h_);
        return s;
    }

    double lo_, hi_;
    bool informed_;
    double sigma_;
    double floor_;
    double h_ = 0.0;
    std::vector<double> centers_, center_w_, cum_;
    double a_uniform_ = 0.0, a_kde_ = 0.0, a_cand_ = 0.0;
};

}  // namespace

EngineState initial_state(const ScenarioConfig& cfg, const GroundTruth& truth) {
    validate(cfg);
    if (truth.mt.empty() || truth.mt[0].size() != cfg.mts.size() || truth.bs_bias.empty() ||
        truth.bs_bias[0].size() != cfg.base_stations.size())
        throw std::invalid_argument("initial_state: ground truth does not match the scenario");
    const EngineConfig& e = cfg.engine;
    const TruthConfig& t = cfg.truth;
    EngineState s;

    const double anchor = mid(t.mt_bias_range) + t.bias_offset;
    const double delta_min = t.bs_bias_range.first - t.mt_bias_range.second;
    const double delta_max = t.bs_bias_range.second - t.mt_bias_range.first;
    const double span = delta_max - delta_min;

    for (std::size_t i = 0; i < cfg.mts.size(); ++i) {
        Rng rng = make_stream(cfg.seed, {tag(StreamTag::kEngineInit), i});
        const MtState& x0 = truth.mt[0][i];
        const std::pair<double, double> support =
            i == 0 ? std::make_pair(anchor, anchor) : std::make_pair(anchor - span, anchor + span);
        MtBelief b;
        b.particles.resize(e.particles_mt);
        for (MtState& p : b.particles) {
            p.position = x0.position + Vec2{gaussian(rng, e.prior_pos_sigma_x), gaussian(rng, e.prior_pos_sigma_y)};
            p.velocity = x0.velocity + Vec2{gaussian(rng, e.prior_vel_sigma), gaussian(rng, e.prior_vel_sigma)};
            p.orientation = wrap_angle(x0.orientation + gaussian(rng, e.prior_orientation_sigma));
            if (e.bias_prior == BiasPriorMode::kTruth)
                p.bias = x0.bias;
            else
                p.bias = i == 0 ? anchor : uniform(rng, support.first, support.second);
        }
        b.set_uniform();
        s.mt_beliefs.push_back(std::move(b));
        s.mt_bias_support.push_back(support);
        s.mt_bias_informed.push_back(e.bias_prior == BiasPriorMode::kTruth || i == 0);
    }

    for (std::size_t j = 0; j < cfg.base_stations.size(); ++j) {
        Rng rng = make_stream(cfg.seed, {tag(StreamTag::kEngineInit), kBsTagBase + j});
        const std::pair<double, double> support{anchor + delta_min, anchor + delta_max};
        ScalarBelief b;
        b.particles.resize(e.particles_bias);
        for (double& p : b.particles)
            p = e.bias_prior == BiasPriorMode::kTruth ? truth.bs_bias[0][j] : uniform(rng, support.first, support.second);
        b.set_uniform();
        s.bias_beliefs.per_bs.push_back(std::move(b));
        s.bs_bias_support.push_back(support);
        s.bs_bias_informed.push_back(e.bias_prior == BiasPriorMode::kTruth);
    }
    return s;
}

Engine::Engine(const ScenarioConfig& cfg, EngineState state, std::size_t threads)
    : cfg_(resolve(cfg)), state_(std::move(state)), threads_(std::max<std::size_t>(1, threads)) {
    validate(cfg_);
    if (state_.mt_beliefs.size() != cfg_.mts.size() || state_.bias_beliefs.per_bs.size() != cfg_.base_stations.size())
        throw std::invalid_argument("engine: state does not match the scenario");
    if (state_.mt_bias_support.size() != cfg_.mts.size()) state_.mt_bias_support.assign(cfg_.mts.size(), {0.0, 0.0});
    if (state_.bs_bias_support.size() != cfg_.base_stations.size())
        state_.bs_bias_support.assign(cfg_.base_stations.size(), {0.0, 0.0});
    state_.mt_bias_informed.resize(cfg_.mts.size(), 1);
    state_.bs_bias_informed.resize(cfg_.base_stations.size(), 1);
}

Engine::Engine(const ScenarioConfig& cfg, const GroundTruth& truth, std::size_t threads)
    : Engine(cfg, initial_state(cfg, truth), threads) {}

struct Engine::Context {
    std::size_t i = 0;
    std::size_t n = 0;
    const std::vector<Measurement>* z = nullptr;
    std::vector<NoiseStddevs> sigmas;
    RatioParams rp;
    std::size_t J = 0;
    std::size_t K = 0;  // legacy PVAs taking part in this update
    std::vector<ScalarMoments> bias_m;
    std::vector<FeatureMoments> pva_m;
    std::vector<std::vector<double>> birth_w;  // [m][j]
    AssociationProblem problem;
    AssociationMarginals marg;
    MtMoments mt_post;
    double mean_sigma_d = 0.0;
    double mean_sigma_phi = 0.0;

    [[nodiscard]] std::size_t M() const { return z->size(); }
};

void Engine::predict() {
    const EngineConfig& e = cfg_.engine;
    const std::size_t n = state_.time;
    parallel_for(state_.mt_beliefs.size(), threads_, [&](std::size_t b, std::size_t end) {
        for (std::size_t i = b; i < end; ++i) {
            Rng rng = make_stream(cfg_.seed, {tag(StreamTag::kEnginePredict), n, i});
            state_.mt_beliefs[i] = predict_mt(std::move(state_.mt_beliefs[i]), cfg_.dt, e, rng);
        }
    });
    for (std::size_t j = 0; j < state_.bias_beliefs.per_bs.size(); ++j) {
        Rng rng = make_stream(cfg_.seed, {tag(StreamTag::kEnginePredict), n, kBsTagBase + j});
        state_.bias_beliefs.per_bs[j] = predict_bias_bs(std::move(state_.bias_beliefs.per_bs[j]), e, rng);
    }
    for (PvaHypothesis& h : state_.pvas) h = predict_pva(std::move(h), e);
}

Estimates Engine::step(const std::vector<std::vector<Measurement>>& z) {
    if (z.size() != cfg_.mts.size()) throw std::invalid_argument("engine: need one measurement set per MT");
    ++state_.time;
    births_.clear();
    predict();
    for (std::size_t i = 0; i < z.size(); ++i) update_mt(i, z[i]);
    confirm_and_prune();
    return extract_estimates();
}

void Engine::propose_mt_bias(std::size_t i, const Context& ctx, Rng& rng) {
    const EngineConfig& e = cfg_.engine;
    MtBelief& mt = state_.mt_beliefs[i];
    if (ctx.M() == 0) return;
    std::vector<double> biases(mt.count());
    for (std::size_t p = 0; p < mt.count(); ++p) biases[p] = mt.particles[p].bias;
    const BiasProposal prop(state_.mt_bias_support[i], state_.mt_bias_informed[i] != 0, biases, mt.weights,
                            e.bias_proposal_sigma, e.bias_prior_floor);
    std::vector<double> cand(ctx.J * ctx.M());
    for (std::size_t p = 0; p < mt.count(); ++p) {
        MtState& x = mt.particles[p];
        for (std::size_t j = 0; j < ctx.J; ++j) {
            const double d = (cfg_.base_stations[j].position - x.position).norm();
            for (std::size_t m = 0; m < ctx.M(); ++m) cand[j * ctx.M() + m] = ctx.bias_m[j].mean + d - (*ctx.z)[m].z_d;
        }
        const auto [b, ratio] = prop.draw(cand, rng);
        x.bias = b;
        mt.weights[p] *= ratio;
    }
    mt.normalize();
}

void Engine::update_mt(std::size_t i, const std::vector<Measurement>& z) {
    const EngineConfig& e = cfg_.engine;
    if (i >= state_.mt_beliefs.size()) throw std::out_of_range("update_mt: MT index");
    Context ctx;
    ctx.i = i;
    ctx.n = state_.time;
    ctx.z = &z;
    ctx.J = cfg_.base_stations.size();
    ctx.K = state_.pvas.size();
    ctx.rp = {e.p_d, e.mu_fp, cfg_.noise.d_max, e.gate_chi2};
    for (const Measurement& m : z) {
        ctx.sigmas.push_back(measurement_sigmas(m, cfg_.noise));
        ctx.mean_sigma_d += ctx.sigmas.back().d / static_cast<double>(z.size());
        ctx.mean_sigma_phi += ctx.sigmas.back().phi / static_cast<double>(z.size());
    }
    const std::size_t M = z.size();
    const std::size_t J = ctx.J;
    const std::size_t K = ctx.K;
    const std::size_t R = J + K;
    MtBelief& mt = state_.mt_beliefs[i];
    Rng rng = make_stream(cfg_.seed, {tag(StreamTag::kEngineMt), ctx.n, i});

    for (const ScalarBelief& b : state_.bias_beliefs.per_bs) ctx.bias_m.push_back(moments(b));

    // step 0: an MT bias that is still broad gets a measurement-driven proposal
    if (std_of_mt_bias(mt) >= e.bias_sharp_std) propose_mt_bias(i, ctx, rng);

    ctx.pva_m.resize(K);
    parallel_for(K, threads_, [&](std::size_t b, std::size_t end) {
        for (std::size_t k = b; k < end; ++k) ctx.pva_m[k] = moments(state_.pvas[k].position_belief);
    });

    auto row_feature = [&](std::size_t r) -> FeatureMoments {
        if (r < J) return {cfg_.base_stations[r].position, Mat2::Zero()};
        return ctx.pva_m[r - J];
    };
    auto row_bs = [&](std::size_t r) { return r < J ? r : state_.pvas[r - J].bs_index - 1; };
    auto row_scale = [&](std::size_t r) { return r < J ? 1.0 : state_.pvas[r - J].existence; };

    // birth weights: probability that measurement m implies a positive range for BS j
    const MtMoments mt_prior_m = moments(mt);
    ctx.birth_w.assign(M, std::vector<double>(J, 0.0));
    ctx.problem.J = J;
    ctx.problem.xi.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t j = 0; j < J; ++j) {
            const double mean = z[m].z_d + mt_prior_m.mean.bias - ctx.bias_m[j].mean;
            const double sd = std::sqrt(mt_prior_m.cov(3, 3) + ctx.bias_m[j].var + ctx.sigmas[m].d * ctx.sigmas[m].d);
            ctx.birth_w[m][j] = sd > 0.0 ? normal_cdf(mean / sd) : (mean > 0.0 ? 1.0 : 0.0);
        }
        ctx.problem.xi[m] = xi_new_weighted(e.mu_n, e.mu_fp, ctx.birth_w[m]);
    }
    ctx.problem.birth_weights = ctx.birth_w;

    const MtBelief mt_before = mt;
    for (std::size_t outer = 0; outer < e.outer_iters; ++outer) {
        // step 1: beta rows
        const MtSample sample = subsample(mt, e.beta_samples);
        const MtMoments mt_m = moments(mt);
        ctx.problem.beta.assign(R, std::vector<double>(M + 1, 0.0));
        parallel_for(R, threads_, [&](std::size_t b, std::size_t end) {
            for (std::size_t r = b; r < end; ++r) {
                const std::size_t j = row_bs(r);
                if (r < J) {
                    ctx.problem.beta[r] = beta_bs(mt, sample, cfg_.base_stations[r], ctx.bias_m[j], z, ctx.sigmas, ctx.rp);
                    continue;
                }
                const PvaHypothesis& h = state_.pvas[r - J];
                std::vector<double>& row = ctx.problem.beta[r];
                row[0] = h.existence * (1.0 - e.p_d) + (1.0 - h.existence);
                if (!(h.existence > 0.0)) continue;
                for (std::size_t m = 0; m < M; ++m) {
                    // cheap moment-level gate before the Monte-Carlo expectation
                    if (path_ratio(ctx.pva_m[r - J], mt_m.mean, &mt_m.cov, ctx.bias_m[j], z[m], ctx.sigmas[m], ctx.rp) ==
                        0.0)
                        continue;
                    double acc = 0.0;
                    for (std::size_t t = 0; t < sample.index.size(); ++t)
                        acc += sample.weight[t] * path_ratio(ctx.pva_m[r - J], mt.particles[sample.index[t]], nullptr,
                                                             ctx.bias_m[j], z[m], ctx.sigmas[m], ctx.rp);
                    row[m + 1] = h.existence * acc;
                }
            }
        });

        // step 2: data association
        ctx.marg = da_bp(ctx.problem, e.da_max_iters, e.da_tol);

        // step 3: MT reweighting with the extrinsic DA messages
        mt = mt_before;
        std::vector<double> logw(mt.count());
        parallel_for(mt.count(), threads_, [&](std::size_t b, std::size_t end) {
            for (std::size_t p = b; p < end; ++p) {
                const MtState& x = mt.particles[p];
                double lw = log_or_floor(mt.weights[p]);
                for (std::size_t r = 0; r < R; ++r) {
                    const auto& beta = ctx.problem.beta[r];
                    double msg = beta[0];
                    const FeatureMoments f = row_feature(r);
                    const ScalarMoments& bias = ctx.bias_m[row_bs(r)];
                    for (std::size_t m = 0; m < M; ++m) {
                        if (!(beta[m + 1] > 0.0)) continue;
                        msg += ctx.marg.nu[m][r] * row_scale(r) * path_ratio(f, x, nullptr, bias, z[m], ctx.sigmas[m], ctx.rp);
                    }
                    lw += log_or_floor(msg);
                }
                logw[p] = lw;
            }
        });
        normalize_log(logw, mt.weights);
    }

    if (M > 0 && mt.effective_sample_size() < e.resample_ess_fraction * static_cast<double>(mt.count())) {
        apply_resample(mt, systematic_resample(mt.weights, mt.count(), rng));
        const double sd = e.jitter_scale * ctx.mean_sigma_d;
        const double so = e.jitter_scale * ctx.mean_sigma_phi;
        for (MtState& x : mt.particles) {
            if (e.jitter_position) x.position += Vec2{gaussian(rng, sd), gaussian(rng, sd)};
            if (e.jitter_orientation) x.orientation = wrap_angle(x.orientation + gaussian(rng, so));
            if (e.jitter_bias) x.bias += gaussian(rng, sd);
        }
    }
    ctx.mt_post = moments(mt);

    // step 4: BS biases
    for (std::size_t j = 0; j < J; ++j) {
        Rng rb = make_stream(cfg_.seed, {tag(StreamTag::kEngineBias), ctx.n, i, j});
        update_bias(j, ctx, rb);
    }
    for (std::size_t j = 0; j < J; ++j) ctx.bias_m[j] = moments(state_.bias_beliefs.per_bs[j]);

    // step 5: legacy PVAs
    parallel_for(K, threads_, [&](std::size_t b, std::size_t end) {
        for (std::size_t k = b; k < end; ++k) update_pva(k, ctx);
    });

    if (M > 0) {
        state_.mt_bias_informed[i] = 1;
        std::fill(state_.bs_bias_informed.begin(), state_.bs_bias_informed.end(), 1);
    }

    // steps 6 and 7: new PVAs, appended m-major, j-minor
    birth(ctx);
    last_marginals_ = std::move(ctx.marg);
}

void Engine::update_bias(std::size_t j, const Context& ctx, Rng& rng) {
    const EngineConfig& e = cfg_.engine;
    const std::size_t M = ctx.M();
    if (M == 0) return;
    const auto& z = *ctx.z;
    ScalarBelief& bel = state_.bias_beliefs.per_bs[j];

    std::vector<std::size_t> rows{j};
    for (std::size_t k = 0; k < ctx.K; ++k)
        if (state_.pvas[k].bs_index == j + 1) rows.push_back(ctx.J + k);

    std::vector<double> logw(bel.count());
    if (std_of(bel) >= e.bias_sharp_std) {
        const BiasProposal prop(state_.bs_bias_support[j], state_.bs_bias_informed[j] != 0, bel.particles, bel.weights,
                                e.bias_proposal_sigma, e.bias_prior_floor);
        const double d = (cfg_.base_stations[j].position - ctx.mt_post.mean.position).norm();
        std::vector<double> cand(M);
        for (std::size_t m = 0; m < M; ++m) cand[m] = z[m].z_d - d + ctx.mt_post.mean.bias;
        for (std::size_t p = 0; p < bel.count(); ++p) {
            const auto [b, ratio] = prop.draw(cand, rng);
            bel.particles[p] = b;
            bel.weights[p] = ratio;
        }
        bel.normalize();
    }

    for (std::size_t p = 0; p < bel.count(); ++p) {
        const ScalarMoments b{bel.particles[p], 0.0};
        double lw = log_or_floor(bel.weights[p]);
        for (std::size_t r : rows) {
            const auto& beta = ctx.problem.beta[r];
            const bool anchor = r < ctx.J;
            const FeatureMoments f =
                anchor ? FeatureMoments{cfg_.base_stations[j].position, Mat2::Zero()} : ctx.pva_m[r - ctx.J];
            const double scale = anchor ? 1.0 : state_.pvas[r - ctx.J].existence;
            double msg = beta[0];
            for (std::size_t m = 0; m < M; ++m) {
                if (!(beta[m + 1] > 0.0)) continue;
                msg += ctx.marg.nu[m][r] * scale *
                       path_ratio(f, ctx.mt_post.mean, &ctx.mt_post.cov, b, z[m], ctx.sigmas[m], ctx.rp);
            }
            lw += log_or_floor(msg);
        }
        logw[p] = lw;
    }
    normalize_log(logw, bel.weights);

    if (bel.effective_sample_size() < e.resample_ess_fraction * static_cast<double>(bel.count())) {
        apply_resample(bel, systematic_resample(bel.weights, bel.count(), rng));
        if (e.jitter_bias) {
            const double sd = e.jitter_scale * ctx.mean_sigma_d;
            for (double& b : bel.particles) b += gaussian(rng, sd);
        }
    }
}

void Engine::update_pva(std::size_t k, const Context& ctx) {
    const EngineConfig& e = cfg_.engine;
    PvaHypothesis& h = state_.pvas[k];
    const std::size_t r = ctx.J + k;
    const auto& beta = ctx.problem.beta[r];
    const auto& z = *ctx.z;
    const ScalarMoments& bias = ctx.bias_m[h.bs_index - 1];

    std::vector<std::size_t> active;
    for (std::size_t m = 0; m < ctx.M(); ++m)
        if (beta[m + 1] > 0.0) active.push_back(m);

    double num = 1.0 - e.p_d;
    if (!active.empty()) {
        PositionBelief& pb = h.position_belief;
        std::vector<double> msg(pb.count());
        double total = 0.0;
        for (std::size_t p = 0; p < pb.count(); ++p) {
            const FeatureMoments f{pb.particles[p], Mat2::Zero()};
            double v = 1.0 - e.p_d;
            for (std::size_t m : active)
                v += ctx.marg.nu[m][r] *
                     path_ratio(f, ctx.mt_post.mean, &ctx.mt_post.cov, bias, z[m], ctx.sigmas[m], ctx.rp);
            msg[p] = v;
            total += pb.weights[p] * v;
        }
        num = total;
        for (std::size_t p = 0; p < pb.count(); ++p) pb.weights[p] *= msg[p];
        pb.normalize();
        if (pb.effective_sample_size() < e.resample_ess_fraction * static_cast<double>(pb.count())) {
            Rng rng = make_stream(cfg_.seed, {tag(StreamTag::kEnginePva), ctx.n, ctx.i, h.key});
            apply_resample(pb, systematic_resample(pb.weights, pb.count(), rng));
            if (e.jitter_position) {
                const double sd = e.jitter_scale * ctx.mean_sigma_d;
                for (Vec2& q : pb.particles) q += Vec2{gaussian(rng, sd), gaussian(rng, sd)};
            }
        }
    }
    const double rr = h.existence;
    const double den = rr * num + (1.0 - rr);
    h.existence = den > 0.0 ? rr * num / den : 0.0;
}

void Engine::birth(const Context& ctx) {
    const EngineConfig& e = cfg_.engine;
    const std::size_t M = ctx.M();
    const std::size_t J = ctx.J;
    if (M == 0 || J == 0) return;
    const auto& z = *ctx.z;
    const MtBelief& mt = state_.mt_beliefs[ctx.i];
    const std::vector<double> mt_cum = cumulate(mt.weights);
    std::vector<std::vector<double>> bias_cum(J);
    for (std::size_t j = 0; j < J; ++j) bias_cum[j] = cumulate(state_.bias_beliefs.per_bs[j].weights);

    std::vector<PvaHypothesis> fresh(M * J);
    std::vector<BirthRecord> records(M * J);
    const std::uint64_t first_key = state_.next_key;
    for (std::size_t m = 0; m < M; ++m) {
        double phi0 = 1.0;
        for (std::size_t r = 0; r < ctx.problem.rows(); ++r) phi0 += ctx.marg.mu[r][m];
        for (std::size_t j = 0; j < J; ++j) {
            const double phi1 = e.mu_n / (static_cast<double>(J) * e.mu_fp) * ctx.birth_w[m][j];
            const std::size_t slot = m * J + j;
            BirthRecord& rec = records[slot];
            rec.key = first_key + slot;
            rec.bs_index = j + 1;
            rec.mt = ctx.i;
            rec.measurement = m + 1;
            rec.existence = phi1 / (phi1 + phi0);
            rec.kept = !e.prune || rec.existence > e.p_pr;
        }
    }

    parallel_for(M * J, threads_, [&](std::size_t b, std::size_t end) {
        for (std::size_t slot = b; slot < end; ++slot) {
            const BirthRecord& rec = records[slot];
            if (!rec.kept) continue;
            const std::size_t m = slot / J;
            const std::size_t j = slot % J;
            const NoiseStddevs& s = ctx.sigmas[m];
            const ScalarBelief& bb = state_.bias_beliefs.per_bs[j];
            Rng rng = make_stream(cfg_.seed, {tag(StreamTag::kEngineBirth), ctx.n, ctx.i, m, j});
            const double w_phi = 1.0 / (s.phi * s.phi);
            const double w_theta = 1.0 / (s.theta * s.theta);

            PvaHypothesis& h = fresh[slot];
            h.key = rec.key;
            h.bs_index = rec.bs_index;
            h.existence = rec.existence;
            h.position_belief.particles.reserve(e.particles_pva);
            const std::size_t max_attempts = 20 * e.particles_pva;
            for (std::size_t attempt = 0; h.position_belief.count() < e.particles_pva; ++attempt) {
                const MtState& x = mt.particles[draw_index(mt_cum, rng)];
                const double b_bs = bb.particles[draw_index(bias_cum[j], rng)];
                const double zd = z[m].z_d + gaussian(rng, s.d);
                const double a1 = z[m].z_phi + gaussian(rng, s.phi) + x.orientation;
                const double a2 = z[m].z_theta + gaussian(rng, s.theta) + kPi;
                double range = zd + x.bias - b_bs;
                if (range <= 0.0) {
                    if (attempt < max_attempts) continue;
                    range = 1e-3;
                }
                const double dir = std::atan2(w_phi * std::sin(a1) + w_theta * std::sin(a2),
                                              w_phi * std::cos(a1) + w_theta * std::cos(a2));
                h.position_belief.particles.push_back(x.position + range * Vec2{std::cos(dir), std::sin(dir)});
            }
            h.position_belief.set_uniform();
        }
    });

    state_.next_key += M * J;
    state_.created += M * J;
    for (std::size_t slot = 0; slot < M * J; ++slot) {
        if (records[slot].kept) state_.pvas.push_back(std::move(fresh[slot]));
        births_.push_back(records[slot]);
    }
}

void Engine::confirm_and_prune() {
    const EngineConfig& e = cfg_.engine;
    for (PvaHypothesis& h : state_.pvas) h.confirmed = h.existence > e.p_cf;
    if (!e.prune) return;
    const std::size_t J = cfg_.base_stations.size();
    std::vector<std::uint64_t> first(J + 1, std::numeric_limits<std::uint64_t>::max());
    for (const PvaHypothesis& h : state_.pvas)
        if (h.bs_index <= J) first[h.bs_index] = std::min(first[h.bs_index], h.key);
    std::erase_if(state_.pvas, [&](const PvaHypothesis& h) {
        return h.existence < e.p_pr && h.key != first[h.bs_index];
    });
}

Estimates Engine::extract_estimates() const {
    Estimates est;
    est.step = state_.time;
    for (const MtBelief& b : state_.mt_beliefs) {
        const MtMoments m = moments(b);
        est.mts.push_back({m.mean.position, m.mean.orientation, m.mean.velocity, m.mean.bias});
    }
    for (const ScalarBelief& b : state_.bias_beliefs.per_bs) est.bs_bias.push_back(moments(b).mean);
    for (const PvaHypothesis& h : state_.pvas) {
        if (!h.confirmed) continue;
        est.confirmed.push_back({h.key, h.bs_index, moments(h.position_belief).mean, h.existence});
    }
    est.hypotheses = state_.pvas.size();
    return est;
}

}  // namespace syncslam
