#pragma once

#include <cmath>

namespace viltwin {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;

    constexpr Vec2 operator+(const Vec2& o) const noexcept { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const noexcept { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double k) const noexcept { return {x * k, y * k}; }
    constexpr double dot(const Vec2& o) const noexcept { return x * o.x + y * o.y; }
    constexpr double cross(const Vec2& o) const noexcept { return x * o.y - y * o.x; }
    double norm() const noexcept { return std::hypot(x, y); }
};

inline double distance(const Vec2& a, const Vec2& b) noexcept { return (a - b).norm(); }

/// Closest point on segment [a, b] to p, as the parameter in [0, 1].
inline double segment_param(const Vec2& a, const Vec2& b, const Vec2& p) noexcept {
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    if (len2 == 0.0) return 0.0;
    double s = (p - a).dot(ab) / len2;
    return s < 0.0 ? 0.0 : (s > 1.0 ? 1.0 : s);
}

inline double point_segment_distance(const Vec2& a, const Vec2& b, const Vec2& p) noexcept {
    const double s = segment_param(a, b, p);
    return distance(a + (b - a) * s, p);
}

}  // namespace viltwin
