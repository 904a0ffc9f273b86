#include "syncslam/oracle.hpp"
#include "syncslam/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace syncslam;

TEST(Environment, OneVaPerBsAndWallInOrder) {
    const ScenarioConfig cfg = default_scenario();
    const std::vector<VirtualAnchor> vas = build_environment(cfg);
    ASSERT_EQ(vas.size(), 6u);
    for (std::size_t k = 0; k < vas.size(); ++k) {
        EXPECT_EQ(vas[k].bs_id, k / 3 + 1);
        EXPECT_EQ(vas[k].wall_id, k % 3 + 1);
    }
    // BS1 at (3, 7) mirrored in x = 0, y = 0 and x = 12
    EXPECT_NEAR((vas[0].position - Vec2{-3.0, 7.0}).norm(), 0.0, 1e-12);
    EXPECT_NEAR((vas[1].position - Vec2{3.0, -7.0}).norm(), 0.0, 1e-12);
    EXPECT_NEAR((vas[2].position - Vec2{21.0, 7.0}).norm(), 0.0, 1e-12);
    EXPECT_NEAR((vas[5].position - Vec2{15.0, 6.5}).norm(), 0.0, 1e-12);
}

TEST(Trajectories, StraightLineExample) {
    ScenarioConfig cfg = default_scenario();
    cfg.mts = {{{1.0, 1.0}, kPi / 2.0, 0.5, {}}};
    cfg.n_steps = 4;
    cfg.dt = 2.0;
    const GroundTruth gt = generate_trajectories(cfg);
    ASSERT_EQ(gt.mt.size(), 5u);
    for (std::size_t n = 0; n <= 4; ++n) {
        EXPECT_NEAR(gt.mt[n][0].position.x(), 1.0, 1e-12);
        EXPECT_NEAR(gt.mt[n][0].position.y(), 1.0 + static_cast<double>(n), 1e-12);
        EXPECT_NEAR(gt.mt[n][0].orientation, kPi / 2.0, 1e-12);
    }
}

TEST(Trajectories, TurnScheduleExample) {
    ScenarioConfig cfg = default_scenario();
    cfg.mts = {{{0.0, 0.0}, 0.0, 1.0, {{0, 0.0}, {1, kPi / 2.0}}}};
    cfg.n_steps = 2;
    const GroundTruth gt = generate_trajectories(cfg);
    EXPECT_NEAR((gt.mt[1][0].position - Vec2{1.0, 0.0}).norm(), 0.0, 1e-12);
    EXPECT_NEAR((gt.mt[2][0].position - Vec2{1.0, 1.0}).norm(), 0.0, 1e-12);
    EXPECT_NEAR(gt.mt[2][0].orientation, kPi / 2.0, 1e-12);
}

TEST(Trajectories, BiasesInsideRangesAndDeterministic) {
    ScenarioConfig cfg = default_scenario();
    cfg.truth.bias_offset = 5.0;
    const GroundTruth a = generate_trajectories(cfg);
    const GroundTruth b = generate_trajectories(cfg);
    for (double x : a.bs_bias[0]) {
        EXPECT_GE(x, 5.0);
        EXPECT_LE(x, 35.0);
    }
    for (const MtState& s : a.mt[0]) {
        EXPECT_GE(s.bias, -25.0);
        EXPECT_LE(s.bias, 5.0);
    }
    for (std::size_t n = 0; n < a.mt.size(); ++n) {
        EXPECT_EQ(a.bs_bias[n], b.bs_bias[n]);
        for (std::size_t i = 0; i < a.mt[n].size(); ++i) EXPECT_EQ(a.mt[n][i].position, b.mt[n][i].position);
    }
    cfg.seed = 2;
    EXPECT_NE(generate_trajectories(cfg).bs_bias[0], a.bs_bias[0]);
}

TEST(Measurements, DeterministicAndLabelled) {
    const ScenarioConfig cfg = resolve(default_scenario());
    GroundTruth a = generate_trajectories(cfg);
    GroundTruth b = generate_trajectories(cfg);
    const MeasurementLog za = simulate_measurements(cfg, a);
    const MeasurementLog zb = simulate_measurements(cfg, b);
    ASSERT_EQ(za.size(), cfg.n_steps + 1);
    EXPECT_TRUE(za[0][0].empty());
    std::size_t fp = 0, det = 0;
    for (std::size_t n = 1; n <= cfg.n_steps; ++n) {
        for (std::size_t i = 0; i < cfg.mts.size(); ++i) {
            ASSERT_EQ(za[n][i].size(), zb[n][i].size());
            ASSERT_EQ(a.labels[n][i].size(), za[n][i].size());
            for (std::size_t m = 0; m < za[n][i].size(); ++m) {
                EXPECT_EQ(za[n][i][m].z_d, zb[n][i][m].z_d);
                const OriginLabel& l = a.labels[n][i][m];
                if (l.is_false_positive()) {
                    ++fp;
                } else {
                    ++det;
                    EXPECT_LE(l.bs_id, 2u);
                    EXPECT_LE(l.feature, 3u);
                }
            }
        }
    }
    EXPECT_GT(det, fp);
}

TEST(Scenario, ResolveFillsDmax) {
    const ScenarioConfig cfg = resolve(default_scenario());
    EXPECT_GT(cfg.noise.d_max, 0.0);
    EXPECT_EQ(cfg.noise.d_max, resolved_d_max(default_scenario()));
}

TEST(ScenarioYaml, RoundTrip) {
    for (const ScenarioConfig& cfg : {default_scenario(), corridor_scenario(), resolve(default_scenario())}) {
        const std::string text = scenario_to_yaml(cfg);
        const ScenarioConfig back = scenario_from_yaml(text);
        EXPECT_TRUE(back == cfg);
        EXPECT_EQ(scenario_to_yaml(back), text);
    }
}

TEST(ScenarioYaml, FileRoundTrip) {
    ScenarioConfig cfg = default_scenario();
    cfg.seed = 99;
    cfg.engine.bias_prior = BiasPriorMode::kTruth;
    cfg.visibility = Visibility::kSegment;
    const std::filesystem::path p = std::filesystem::temp_directory_path() / "syncslam_test_scenario.yaml";
    save_scenario(cfg, p.string());
    EXPECT_TRUE(load_scenario(p.string()) == cfg);
    std::filesystem::remove(p);
    EXPECT_ANY_THROW((void)load_scenario("/nonexistent/scenario.yaml"));
}

TEST(ScenarioYaml, RejectsInvalid) {
    EXPECT_ANY_THROW((void)scenario_from_yaml("walls: [[[0, 0], [0, 0]]]\n"));
    EXPECT_ANY_THROW((void)scenario_from_yaml("n_steps: [1, 2"));
}

TEST(ScenarioValidate, Throws) {
    ScenarioConfig cfg = default_scenario();
    EXPECT_NO_THROW(validate(cfg));
    auto expect_bad = [](ScenarioConfig c) { EXPECT_THROW(validate(c), std::invalid_argument); };
    ScenarioConfig c = cfg;
    c.n_steps = 0;
    expect_bad(c);
    c = cfg;
    c.base_stations.clear();
    expect_bad(c);
    c = cfg;
    c.mts.clear();
    expect_bad(c);
    c = cfg;
    c.walls[0].endpoint_b = c.walls[0].endpoint_a;
    expect_bad(c);
    c = cfg;
    c.base_stations[1].id = 5;
    expect_bad(c);
    c = cfg;
    c.noise.p_d = 0.0;
    expect_bad(c);
    c = cfg;
    c.truth.mt_bias_range = {1.0, -1.0};
    expect_bad(c);
    c = cfg;
    c.engine.p_s = 1.5;
    expect_bad(c);
}
