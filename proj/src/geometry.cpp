#include "syncslam/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace syncslam {

double wrap_angle(double x) {
    double r = std::fmod(x + kPi, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    r -= kPi;
    // fmod rounding can land exactly on +pi
    if (r >= kPi) r -= kTwoPi;
    return r;
}

Vec2 mirror_point(const Vec2& p, const Wall& w) {
    const Vec2 dir = w.endpoint_b - w.endpoint_a;
    const double len2 = dir.squaredNorm();
    if (!(len2 > 0.0)) throw std::invalid_argument("mirror_point: degenerate wall");
    const Vec2 rel = p - w.endpoint_a;
    const Vec2 foot = w.endpoint_a + dir * (rel.dot(dir) / len2);
    return 2.0 * foot - p;
}

GeoObservation geo_observation(const Vec2& p_feature, const Vec2& p_mt, double o_mt) {
    const Vec2 delta = p_feature - p_mt;
    const double d = delta.norm();
    if (!(d > 0.0)) throw std::invalid_argument("geo_observation: feature and MT coincide");
    GeoObservation g;
    g.distance = d;
    g.aoa = wrap_angle(std::atan2(delta.y(), delta.x()) - o_mt);
    g.aod = wrap_angle(std::atan2(-delta.y(), -delta.x()));
    return g;
}

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

std::optional<Vec2> reflection_point(const Vec2& p_bs, const Vec2& p_mt, const Wall& w) {
    const Vec2 dir = w.endpoint_b - w.endpoint_a;
    const double s_bs = cross(dir, p_bs - w.endpoint_a);
    const double s_mt = cross(dir, p_mt - w.endpoint_a);
    if (s_bs * s_mt <= 0.0) return std::nullopt;
    const Vec2 va = mirror_point(p_bs, w);
    // line va -> mt crosses the wall line at the specular point
    const Vec2 ray = p_mt - va;
    const double denom = cross(dir, ray);
    if (denom == 0.0) return std::nullopt;
    const double t = cross(w.endpoint_a - va, dir) / cross(ray, dir);
    return va + t * ray;
}

bool segments_intersect(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b) {
    const double d1 = cross(b - a, p - a);
    const double d2 = cross(b - a, q - a);
    const double d3 = cross(q - p, a - p);
    const double d4 = cross(q - p, b - p);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on_segment = [](const Vec2& s, const Vec2& e, const Vec2& x) {
        return std::min(s.x(), e.x()) <= x.x() && x.x() <= std::max(s.x(), e.x()) &&
               std::min(s.y(), e.y()) <= x.y() && x.y() <= std::max(s.y(), e.y());
    };
    if (d1 == 0 && on_segment(a, b, p)) return true;
    if (d2 == 0 && on_segment(a, b, q)) return true;
    if (d3 == 0 && on_segment(p, q, a)) return true;
    if (d4 == 0 && on_segment(p, q, b)) return true;
    return false;
}

double circular_mean(const std::vector<double>& angles, const std::vector<double>& weights) {
    double s = 0.0;
    double c = 0.0;
    for (std::size_t k = 0; k < angles.size(); ++k) {
        s += weights[k] * std::sin(angles[k]);
        c += weights[k] * std::cos(angles[k]);
    }
    return wrap_angle(std::atan2(s, c));
}

}  // namespace syncslam
