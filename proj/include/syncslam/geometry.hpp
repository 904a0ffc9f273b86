#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <vector>

namespace syncslam {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSpeedOfLight = 299792458.0;

/// Reflecting surface, treated as an infinite line for mirroring.
struct Wall {
    Vec2 endpoint_a{0.0, 0.0};
    Vec2 endpoint_b{0.0, 0.0};

    [[nodiscard]] double length() const { return (endpoint_b - endpoint_a).norm(); }
};

/// Transmitter with known position. Orientation is fixed to zero.
struct BaseStation {
    std::size_t id = 1;  // 1-based
    Vec2 position{0.0, 0.0};
    double orientation = 0.0;
};

/// Single-bounce mirror image of a base station across a wall.
struct VirtualAnchor {
    std::size_t bs_id = 1;    // 1-based
    std::size_t wall_id = 1;  // 1-based
    Vec2 position{0.0, 0.0};
};

struct GeoObservation {
    double distance = 0.0;
    double aoa = 0.0;  // MT body frame
    double aod = 0.0;  // global frame, feature -> MT
};

/// Wraps an angle into [-pi, pi).
[[nodiscard]] double wrap_angle(double x);

/// Reflection of `p` across the supporting line of `w`. Throws on a degenerate wall.
[[nodiscard]] Vec2 mirror_point(const Vec2& p, const Wall& w);

/// Distance / AoA / AoD of the path from `p_feature` to an MT at `p_mt` with orientation `o_mt`.
/// Throws if the two points coincide.
[[nodiscard]] GeoObservation geo_observation(const Vec2& p_feature, const Vec2& p_mt, double o_mt);

/// Mean of the measured distance: d - (b_mt - b_bs). Biases in meters.
[[nodiscard]] constexpr double biased_distance(double d, double b_bs, double b_mt) {
    return d - (b_mt - b_bs);
}

/// Specular reflection point on the wall line for the path bs -> wall -> mt, if the
/// two points lie strictly on the same side of the line.
[[nodiscard]] std::optional<Vec2> reflection_point(const Vec2& p_bs, const Vec2& p_mt, const Wall& w);

/// True if segment [p, q] crosses segment [a, b] (proper or touching intersection).
[[nodiscard]] bool segments_intersect(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b);

/// Circular mean of weighted angles; returns wrapped angle.
[[nodiscard]] double circular_mean(const std::vector<double>& angles, const std::vector<double>& weights);

}  // namespace syncslam
