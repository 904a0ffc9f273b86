#include "syncslam/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

using namespace syncslam;

namespace {

// Householder reflection about the line through `a` with direction `d`.
Vec2 householder_mirror(const Vec2& p, const Vec2& a, const Vec2& d) {
    const Vec2 n = Vec2{-d.y(), d.x()}.normalized();
    const Mat2 h = Mat2::Identity() - 2.0 * n * n.transpose();
    return a + h * (p - a);
}

double complex_angle(const Vec2& v) { return std::arg(std::complex<double>(v.x(), v.y())); }

Wall random_wall(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (;;) {
        Wall w{{u(rng), u(rng)}, {u(rng), u(rng)}};
        if (w.length() > 0.5) return w;
    }
}

}  // namespace

TEST(MirrorPoint, ReflectsAcrossXAxis) {
    const Vec2 m = mirror_point({1.0, 1.0}, Wall{{0.0, 0.0}, {1.0, 0.0}});
    EXPECT_DOUBLE_EQ(m.x(), 1.0);
    EXPECT_DOUBLE_EQ(m.y(), -1.0);
}

TEST(MirrorPoint, DiagonalMatchesHouseholder) {
    const Vec2 p{2.0, 3.0};
    const Vec2 oracle = householder_mirror(p, {0.0, 0.0}, {1.0, 1.0});
    ASSERT_NEAR(oracle.x(), 3.0, 1e-12);
    ASSERT_NEAR(oracle.y(), 2.0, 1e-12);
    const Vec2 m = mirror_point(p, Wall{{0.0, 0.0}, {1.0, 1.0}});
    EXPECT_NEAR(m.x(), oracle.x(), 1e-12);
    EXPECT_NEAR(m.y(), oracle.y(), 1e-12);
}

TEST(MirrorPoint, InvolutionAndHouseholderOnRandomWalls) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int k = 0; k < 1000; ++k) {
        const Wall w = random_wall(rng);
        const Vec2 p{u(rng), u(rng)};
        const Vec2 m = mirror_point(p, w);
        EXPECT_LT((mirror_point(m, w) - p).norm(), 1e-12);
        EXPECT_LT((m - householder_mirror(p, w.endpoint_a, w.endpoint_b - w.endpoint_a)).norm(), 1e-10);
    }
}

TEST(MirrorPoint, DegenerateWallThrows) {
    EXPECT_THROW((void)mirror_point({1.0, 1.0}, Wall{{2.0, 2.0}, {2.0, 2.0}}), std::invalid_argument);
}

TEST(GeoObservation, CollinearOnXAxis) {
    const GeoObservation g = geo_observation({3.0, 0.0}, {0.0, 0.0}, 0.0);
    EXPECT_DOUBLE_EQ(g.distance, 3.0);
    EXPECT_DOUBLE_EQ(g.aoa, 0.0);
    EXPECT_NEAR(std::abs(g.aod), kPi, 1e-15);
    EXPECT_LT(g.aod, kPi);
}

TEST(GeoObservation, BodyFrameRotation) {
    const GeoObservation g = geo_observation({0.0, 4.0}, {0.0, 0.0}, kPi / 2.0);
    EXPECT_DOUBLE_EQ(g.distance, 4.0);
    EXPECT_NEAR(g.aoa, 0.0, 1e-15);
    EXPECT_NEAR(g.aod, -kPi / 2.0, 1e-15);
}

TEST(GeoObservation, MatchesIndependentTrig) {
    const Vec2 f{1.0, 1.0}, mt{-1.0, 0.0};
    const double o = 0.3;
    double aoa = complex_angle(f - mt) - o;
    if (aoa >= kPi) aoa -= kTwoPi;
    if (aoa < -kPi) aoa += kTwoPi;
    const double aod = complex_angle(mt - f);
    const GeoObservation g = geo_observation(f, mt, o);
    EXPECT_NEAR(g.distance, std::sqrt(5.0), 1e-15);
    EXPECT_NEAR(g.aoa, aoa, 1e-15);
    EXPECT_NEAR(g.aod, aod, 1e-15);
    EXPECT_NEAR(g.aoa, std::atan2(1.0, 2.0) - 0.3, 1e-15);
    EXPECT_NEAR(g.aod, std::atan2(-1.0, -2.0), 1e-15);
}

TEST(GeoObservation, AnglesAlwaysWrapped) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int k = 0; k < 2000; ++k) {
        const GeoObservation g = geo_observation({u(rng), u(rng)}, {u(rng), u(rng)}, u(rng));
        EXPECT_GE(g.aoa, -kPi);
        EXPECT_LT(g.aoa, kPi);
        EXPECT_GE(g.aod, -kPi);
        EXPECT_LT(g.aod, kPi);
    }
}

TEST(GeoObservation, CoincidentPointsThrow) {
    EXPECT_THROW((void)geo_observation({1.0, 2.0}, {1.0, 2.0}, 0.0), std::invalid_argument);
}

TEST(BiasedDistance, Examples) {
    EXPECT_DOUBLE_EQ(biased_distance(10.0, 0.0, 0.0), 10.0);
    EXPECT_DOUBLE_EQ(biased_distance(10.0, 2.0, 2.0), 10.0);
    EXPECT_DOUBLE_EQ(biased_distance(10.0, 3.0, 1.0), 12.0);
}

TEST(BiasedDistance, GaugeInvariant) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    for (int k = 0; k < 1000; ++k) {
        const double d = std::abs(u(rng)), bb = u(rng), bm = u(rng), c = u(rng);
        EXPECT_NEAR(biased_distance(d, bb + c, bm + c), biased_distance(d, bb, bm), 1e-12);
    }
}

TEST(WrapAngle, Examples) {
    EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
    EXPECT_NEAR(wrap_angle(3.0 * kPi), -kPi, 1e-12);
    EXPECT_NEAR(wrap_angle(-kPi - 0.1), kPi - 0.1, 1e-12);
    EXPECT_NEAR(wrap_angle(kPi), -kPi, 1e-15);
}

TEST(WrapAngle, RangeProperty) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int k = 0; k < 5000; ++k) {
        const double x = u(rng);
        const double w = wrap_angle(x);
        EXPECT_GE(w, -kPi);
        EXPECT_LT(w, kPi);
        EXPECT_NEAR(std::sin(w), std::sin(x), 1e-9);
        EXPECT_NEAR(std::cos(w), std::cos(x), 1e-9);
    }
}

TEST(ReflectionPoint, PathLengthEquivalence) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    int checked = 0;
    while (checked < 1000) {
        const Wall w = random_wall(rng);
        const Vec2 bs{u(rng), u(rng)}, mt{u(rng), u(rng)};
        const auto q = reflection_point(bs, mt, w);
        if (!q) continue;
        const Vec2 va = mirror_point(bs, w);
        EXPECT_NEAR((va - mt).norm(), (bs - *q).norm() + (*q - mt).norm(), 1e-10);
        ++checked;
    }
}

TEST(ReflectionPoint, OppositeSidesHaveNone) {
    const Wall w{{0.0, 0.0}, {1.0, 0.0}};
    EXPECT_FALSE(reflection_point({0.0, 1.0}, {2.0, -1.0}, w).has_value());
    const auto q = reflection_point({0.0, 1.0}, {2.0, 1.0}, w);
    ASSERT_TRUE(q.has_value());
    EXPECT_NEAR(q->x(), 1.0, 1e-12);
    EXPECT_NEAR(q->y(), 0.0, 1e-12);
}

TEST(SegmentsIntersect, Cases) {
    EXPECT_TRUE(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
    EXPECT_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
    EXPECT_TRUE(segments_intersect({0, 0}, {1, 0}, {1, 0}, {1, 1}));
}

TEST(CircularMean, WrapCorrect) {
    const double m = circular_mean({-kPi + 0.1, kPi - 0.1}, {0.5, 0.5});
    EXPECT_NEAR(std::abs(m), kPi, 1e-12);
    EXPECT_NEAR(circular_mean({0.1, 0.3}, {1.0, 1.0}), 0.2, 1e-12);
}
