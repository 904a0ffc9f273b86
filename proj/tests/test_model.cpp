#include "syncslam/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace syncslam;

namespace {

EngineConfig quiet_config() {
    EngineConfig c;
    c.accel_sigma = 0.0;
    c.orientation_sigma = 0.0;
    c.bias_sigma_mt = 0.0;
    c.bias_sigma_bs = 0.0;
    return c;
}

}  // namespace

TEST(PredictMt, NoiselessIsConstantVelocity) {
    MtBelief b;
    b.particles = {{{1.0, 2.0}, 0.5, {0.5, -1.0}, 3.0}};
    b.set_uniform();
    Rng rng = make_stream(1, {1});
    const MtBelief out = predict_mt(b, 2.0, quiet_config(), rng);
    EXPECT_DOUBLE_EQ(out.particles[0].position.x(), 2.0);
    EXPECT_DOUBLE_EQ(out.particles[0].position.y(), 0.0);
    EXPECT_DOUBLE_EQ(out.particles[0].orientation, 0.5);
    EXPECT_DOUBLE_EQ(out.particles[0].bias, 3.0);
    EXPECT_EQ(out.weights, b.weights);
}

TEST(PredictMt, MonteCarloMoments) {
    EngineConfig c = quiet_config();
    c.accel_sigma = 0.2;
    c.bias_sigma_mt = 0.1;
    MtBelief b;
    b.particles.assign(40000, MtState{{0.0, 0.0}, 0.0, {1.0, 0.0}, 0.0});
    b.set_uniform();
    Rng rng = make_stream(2, {2});
    const double dt = 2.0;
    const MtBelief out = predict_mt(b, dt, c, rng);
    double mx = 0.0, vx = 0.0, vb = 0.0, vvel = 0.0;
    for (const MtState& s : out.particles) mx += s.position.x();
    mx /= out.count();
    for (const MtState& s : out.particles) {
        vx += (s.position.x() - mx) * (s.position.x() - mx);
        vb += s.bias * s.bias;
        vvel += (s.velocity.x() - 1.0) * (s.velocity.x() - 1.0);
    }
    vx /= out.count();
    vb /= out.count();
    vvel /= out.count();
    const double pos_var = std::pow(0.5 * dt * dt * 0.2, 2);
    EXPECT_NEAR(mx, dt, 0.01);
    EXPECT_NEAR(vx / pos_var, 1.0, 0.05);
    EXPECT_NEAR(vvel / std::pow(dt * 0.2, 2), 1.0, 0.05);
    EXPECT_NEAR(vb / 0.01, 1.0, 0.05);
}

TEST(PredictBias, VarianceGrowsLinearly) {
    EngineConfig c = quiet_config();
    c.bias_sigma_bs = 0.3;
    ScalarBelief b;
    b.particles.assign(20000, 5.0);
    b.set_uniform();
    Rng rng = make_stream(3, {3});
    for (int n = 0; n < 4; ++n) b = predict_bias_bs(b, c, rng);
    double mean = 0.0, var = 0.0;
    for (double x : b.particles) mean += x;
    mean /= b.count();
    for (double x : b.particles) var += (x - mean) * (x - mean);
    var /= b.count();
    EXPECT_NEAR(mean, 5.0, 0.02);
    EXPECT_NEAR(var / (4 * 0.09), 1.0, 0.05);
}

TEST(PredictPva, ExistenceDecaysGeometrically) {
    EngineConfig c;
    c.p_s = 0.9;
    PvaHypothesis h;
    h.existence = 0.8;
    h.bs_index = 2;
    h.key = 7;
    for (int n = 0; n < 5; ++n) h = predict_pva(h, c);
    EXPECT_NEAR(h.existence, 0.8 * std::pow(0.9, 5), 1e-15);
    EXPECT_EQ(h.bs_index, 2u);
    EXPECT_EQ(h.key, 7u);
}

TEST(InterMtTransition, Identity) {
    PvaHypothesis h;
    h.key = 3;
    h.bs_index = 2;
    h.existence = 0.4;
    h.position_belief.particles = {{1.0, 2.0}, {3.0, 4.0}};
    h.position_belief.set_uniform();
    const PvaHypothesis out = inter_mt_transition(h);
    EXPECT_EQ(out.key, h.key);
    EXPECT_EQ(out.bs_index, h.bs_index);
    EXPECT_EQ(out.existence, h.existence);
    EXPECT_EQ(out.position_belief.particles, h.position_belief.particles);
}

TEST(SystematicResample, CountsFollowWeights) {
    Rng rng = make_stream(4, {4});
    const std::vector<double> w{0.1, 0.0, 0.6, 0.3};
    const std::vector<std::size_t> idx = systematic_resample(w, 1000, rng);
    ASSERT_EQ(idx.size(), 1000u);
    std::vector<int> counts(4, 0);
    for (std::size_t k : idx) ++counts[k];
    // systematic resampling is within one copy of n w_k
    EXPECT_NEAR(counts[0], 100, 1);
    EXPECT_EQ(counts[1], 0);
    EXPECT_NEAR(counts[2], 600, 1);
    EXPECT_NEAR(counts[3], 300, 1);
    EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
}

TEST(SystematicResample, UnnormalizedAndEmpty) {
    Rng rng = make_stream(5, {5});
    const std::vector<std::size_t> idx = systematic_resample({0.0, 5.0, 0.0}, 10, rng);
    for (std::size_t k : idx) EXPECT_EQ(k, 1u);
    EXPECT_EQ(systematic_resample({}, 3, rng).size(), 3u);
}

TEST(ParticleBelief, NormalizeAndEss) {
    ScalarBelief b;
    b.particles = {1.0, 2.0, 3.0, 4.0};
    b.weights = {1.0, 1.0, 1.0, 1.0};
    b.normalize();
    EXPECT_DOUBLE_EQ(b.weights[0], 0.25);
    EXPECT_DOUBLE_EQ(b.effective_sample_size(), 4.0);
    b.weights = {0.0, 0.0, 0.0, 0.0};
    b.normalize();
    EXPECT_DOUBLE_EQ(b.weights[3], 0.25);
    b.weights = {1.0, 0.0, 0.0, 0.0};
    EXPECT_DOUBLE_EQ(b.effective_sample_size(), 1.0);
}

TEST(EngineConfigValidate, Throws) {
    EXPECT_NO_THROW(validate(EngineConfig{}));
    auto bad = [](auto mutate) {
        EngineConfig c;
        mutate(c);
        EXPECT_THROW(validate(c), std::invalid_argument);
    };
    bad([](EngineConfig& c) { c.p_d = 1.0; });
    bad([](EngineConfig& c) { c.p_s = 0.0; });
    bad([](EngineConfig& c) { c.p_pr = 0.6; });
    bad([](EngineConfig& c) { c.mu_n = -1.0; });
    bad([](EngineConfig& c) { c.mu_fp = 0.0; });
    bad([](EngineConfig& c) { c.particles_mt = 0; });
    bad([](EngineConfig& c) { c.outer_iters = 0; });
    bad([](EngineConfig& c) { c.bias_prior_floor = 1.0; });
    bad([](EngineConfig& c) { c.bias_proposal_sigma = 0.0; });
}

TEST(BiasPriorMode, Strings) {
    EXPECT_EQ(bias_prior_from_string(to_string(BiasPriorMode::kTruth)), BiasPriorMode::kTruth);
    EXPECT_EQ(bias_prior_from_string("uniform"), BiasPriorMode::kUniform);
    EXPECT_THROW((void)bias_prior_from_string("gaussian"), std::invalid_argument);
}
