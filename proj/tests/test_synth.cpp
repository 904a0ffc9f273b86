#include "syncslam/scenario.hpp"
#include "syncslam/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace syncslam;

namespace {

SynthInput desk_input(const ScenarioConfig& cfg) {
    SynthInput in;
    in.mt = {{4.0, 2.5}, 0.4, {0.0, 0.0}, -7.0};
    in.base_stations = cfg.base_stations;
    in.bs_biases = {3.0, 11.0};
    in.vas = build_environment(cfg);
    in.walls = cfg.walls;
    return in;
}

NoiseConfig clean_noise(double p_d, double mu_fp) {
    NoiseConfig nc;
    nc.p_d = p_d;
    nc.mu_fp = mu_fp;
    nc.d_max = 200.0;
    return nc;
}

}  // namespace

TEST(Amplitude, ReferencePointAndSlope) {
    NoiseConfig nc;
    nc.snr_ref_db = 30.0;
    nc.d_ref = 1.0;
    EXPECT_NEAR(amplitude_from_distance(1.0, nc), std::sqrt(1000.0), 1e-12);
    EXPECT_NEAR(amplitude_from_distance(10.0, nc), std::sqrt(1000.0) / 10.0, 1e-12);
}

TEST(Amplitude, MatchesIndependentCalculation) {
    NoiseConfig nc;
    nc.snr_ref_db = 26.0;
    nc.d_ref = 1.0;
    const double loss_db = 20.0 * std::log10(2.0);
    ASSERT_NEAR(loss_db, 6.02, 1e-3);
    const double oracle = std::pow(10.0, (26.0 - loss_db) / 20.0);
    EXPECT_NEAR(amplitude_from_distance(2.0, nc), oracle, 1e-12);
}

TEST(NoiseStddevs, DistanceSigmaClosedForm) {
    NoiseConfig nc;
    nc.beta_bw = 1e8;
    const double z_u = 31.62;
    const double oracle = kSpeedOfLight / (std::sqrt(8.0) * kPi * 1e8 * z_u);
    ASSERT_NEAR(oracle, 0.0107, 5e-5);
    EXPECT_NEAR(noise_stddevs(z_u, 0.5, 1.0, nc).d, oracle, 1e-15);
}

TEST(NoiseStddevs, ScaleLaws) {
    NoiseConfig nc;
    const NoiseStddevs a = noise_stddevs(5.0, 0.7, -1.2, nc);
    const NoiseStddevs b = noise_stddevs(10.0, 0.7, -1.2, nc);
    EXPECT_NEAR(b.d, a.d / 2.0, 1e-15);
    EXPECT_NEAR(b.phi, a.phi / 2.0, 1e-15);
    EXPECT_NEAR(b.theta, a.theta / 2.0, 1e-15);

    NoiseConfig wide = nc;
    wide.array_mt.spacing *= 2.0;  // D^2 grows by 4
    ASSERT_NEAR(aperture_sq(0.7, wide.array_mt, 0.0), 4.0 * aperture_sq(0.7, nc.array_mt, 0.0), 1e-12);
    EXPECT_NEAR(noise_stddevs(5.0, 0.7, -1.2, wide).phi, a.phi / 2.0, 1e-15);
}

TEST(NoiseStddevs, EndfireClampAndErrors) {
    NoiseConfig nc;
    EXPECT_DOUBLE_EQ(aperture_sq(0.0, nc.array_mt, nc.d2_floor), nc.d2_floor);
    EXPECT_THROW((void)noise_stddevs(0.0, 0.1, 0.1, nc), std::invalid_argument);
    nc.d2_floor = 0.0;
    EXPECT_THROW((void)noise_stddevs(1.0, 0.0, 0.1, nc), std::invalid_argument);
}

TEST(Synthesize, CountsWithPerfectDetection) {
    const ScenarioConfig cfg = default_scenario();
    const SynthInput in = desk_input(cfg);
    Rng rng = make_stream(1, {1});
    const SynthOutput out = synthesize(in, clean_noise(1.0, 0.0), rng);
    EXPECT_EQ(out.measurements.size(), 8u);
    ASSERT_EQ(out.labels.size(), 8u);
    std::vector<int> seen(2 * 4, 0);
    for (const OriginLabel& l : out.labels) {
        ASSERT_FALSE(l.is_false_positive());
        ++seen[(l.bs_id - 1) * 4 + l.feature];
    }
    for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(Synthesize, NoDetectionsNoClutterIsEmpty) {
    const ScenarioConfig cfg = default_scenario();
    Rng rng = make_stream(1, {2});
    const SynthOutput out = synthesize(desk_input(cfg), clean_noise(0.0, 0.0), rng);
    EXPECT_TRUE(out.measurements.empty());
    EXPECT_TRUE(out.labels.empty());
}

TEST(Synthesize, PoissonClutterMean) {
    const ScenarioConfig cfg = default_scenario();
    const SynthInput in = desk_input(cfg);
    const NoiseConfig nc = clean_noise(0.0, 2.0);
    Rng rng = make_stream(4, {3});
    const int trials = 10000;
    double total = 0.0;
    for (int t = 0; t < trials; ++t) total += static_cast<double>(synthesize(in, nc, rng).measurements.size());
    EXPECT_NEAR(total / trials, 2.0, 0.05);
}

TEST(Synthesize, MeasurementInvariants) {
    const ScenarioConfig cfg = default_scenario();
    const SynthInput in = desk_input(cfg);
    NoiseConfig nc = clean_noise(0.8, 3.0);
    nc.amplitude_mode = AmplitudeMode::kRician;
    Rng rng = make_stream(8, {3});
    for (int t = 0; t < 500; ++t) {
        const SynthOutput out = synthesize(in, nc, rng);
        ASSERT_EQ(out.labels.size(), out.measurements.size());
        for (const Measurement& m : out.measurements) {
            EXPECT_GE(m.z_u, nc.gamma);
            EXPECT_GE(m.z_d, 0.0);
            EXPECT_LE(m.z_d, nc.d_max);
            EXPECT_GE(m.z_phi, -kPi);
            EXPECT_LT(m.z_phi, kPi);
            EXPECT_GE(m.z_theta, -kPi);
            EXPECT_LT(m.z_theta, kPi);
        }
    }
}

TEST(Synthesize, GaugeShiftGivesSameMeasurements) {
    const ScenarioConfig cfg = default_scenario();
    SynthInput a = desk_input(cfg);
    SynthInput b = a;
    const double c = 17.0;
    b.mt.bias += c;
    for (double& x : b.bs_biases) x += c;
    const NoiseConfig nc = clean_noise(0.9, 1.0);
    Rng ra = make_stream(21, {1});
    Rng rb = make_stream(21, {1});
    for (int t = 0; t < 200; ++t) {
        const SynthOutput oa = synthesize(a, nc, ra);
        const SynthOutput ob = synthesize(b, nc, rb);
        ASSERT_EQ(oa.measurements.size(), ob.measurements.size());
        for (std::size_t m = 0; m < oa.measurements.size(); ++m) {
            // biases on a dyadic grid shift without rounding
            EXPECT_EQ(oa.measurements[m].z_d, ob.measurements[m].z_d);
            EXPECT_EQ(oa.measurements[m].z_phi, ob.measurements[m].z_phi);
            EXPECT_EQ(oa.labels[m], ob.labels[m]);
        }
    }
}

TEST(Synthesize, OrderIsUniformlyPermuted) {
    const ScenarioConfig cfg = default_scenario();
    const SynthInput in = desk_input(cfg);
    const NoiseConfig nc = clean_noise(1.0, 0.0);
    Rng rng = make_stream(6, {6});
    std::vector<int> where(8, 0);
    const int trials = 8000;
    for (int t = 0; t < trials; ++t) {
        const SynthOutput out = synthesize(in, nc, rng);
        for (std::size_t m = 0; m < out.labels.size(); ++m)
            if (out.labels[m].bs_id == 1 && out.labels[m].feature == 0) ++where[m];
    }
    double chi2 = 0.0;
    for (int w : where) chi2 += (w - trials / 8.0) * (w - trials / 8.0) / (trials / 8.0);
    EXPECT_LT(chi2, 24.3);  // 99.9% quantile, 7 dof
}

TEST(Synthesize, SegmentVisibilityDropsHiddenPaths) {
    ScenarioConfig cfg = default_scenario();
    SynthInput in = desk_input(cfg);
    in.visibility = Visibility::kSegment;
    in.mt.position = {-2.0, 4.0};  // behind the left wall
    Rng rng = make_stream(2, {2});
    const SynthOutput out = synthesize(in, clean_noise(1.0, 0.0), rng);
    EXPECT_LT(out.measurements.size(), 8u);
}

TEST(Synthesize, BiasCountMismatchThrows) {
    const ScenarioConfig cfg = default_scenario();
    SynthInput in = desk_input(cfg);
    in.bs_biases.pop_back();
    Rng rng = make_stream(1, {1});
    EXPECT_THROW((void)synthesize(in, clean_noise(1.0, 0.0), rng), std::invalid_argument);
}

TEST(Synthesize, ModeStrings) {
    EXPECT_EQ(amplitude_mode_from_string(to_string(AmplitudeMode::kRician)), AmplitudeMode::kRician);
    EXPECT_EQ(visibility_from_string(to_string(Visibility::kSegment)), Visibility::kSegment);
    EXPECT_THROW((void)visibility_from_string("sometimes"), std::invalid_argument);
}
