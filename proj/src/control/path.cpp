#include "viltwin/control/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace viltwin::control {

WaypointPath::WaypointPath(std::vector<Vec2> points, bool cyclic) : pts_(std::move(points)), cyclic_(cyclic) {
    if (pts_.size() < 2) throw ValidationError("a path needs at least 2 points");
    for (const auto& p : pts_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError("path point is not finite");
    }
    const std::size_t segments = cyclic_ ? pts_.size() : pts_.size() - 1;
    cum_.reserve(segments + 1);
    cum_.push_back(0.0);
    for (std::size_t i = 0; i < segments; ++i) {
        const double len = distance(segment_start(i), segment_end(i));
        if (len == 0.0) throw ValidationError("path has repeated consecutive point at index " + std::to_string(i));
        cum_.push_back(cum_.back() + len);
    }
}

double WaypointPath::wrap(double s) const {
    const double L = length();
    if (!cyclic_) return std::clamp(s, 0.0, L);
    double w = std::fmod(s, L);
    if (w < 0.0) w += L;
    return w >= L ? 0.0 : w;
}

namespace {

std::size_t segment_of(const std::vector<double>& cum, double s) {
    auto it = std::upper_bound(cum.begin(), cum.end(), s);
    std::size_t i = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
    return std::min(i, cum.size() - 2);
}

}  // namespace

Vec2 WaypointPath::point_at(double s) const {
    const double w = wrap(s);
    const std::size_t i = segment_of(cum_, w);
    const double seg = cum_[i + 1] - cum_[i];
    const Vec2 a = segment_start(i);
    return a + (segment_end(i) - a) * ((w - cum_[i]) / seg);
}

double WaypointPath::heading_at(double s) const {
    const std::size_t i = segment_of(cum_, wrap(s));
    const Vec2 d = segment_end(i) - segment_start(i);
    return std::atan2(d.y, d.x);
}

double WaypointPath::forward_distance(double from, double to) const {
    if (!cyclic_) return wrap(to) - wrap(from);
    return wrap(wrap(to) - wrap(from));
}

WaypointPath::Projection WaypointPath::project(const Vec2& p) const {
    Projection best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < segment_count(); ++i) {
        const Vec2 a = segment_start(i);
        const Vec2 b = segment_end(i);
        const double u = segment_param(a, b, p);
        const Vec2 q = a + (b - a) * u;
        const double d = distance(q, p);
        if (d < best.distance) {
            best.distance = d;
            best.point = q;
            best.s = wrap(cum_[i] + u * (cum_[i + 1] - cum_[i]));
            best.lateral = (b - a).cross(p - a) >= 0.0 ? d : -d;
        }
    }
    return best;
}

WaypointPath::Projection WaypointPath::project_near(const Vec2& p, double hint, double back, double ahead) const {
    const double L = length();
    const double lo = hint - back;
    const double hi = hint + ahead;
    Projection best;
    best.distance = std::numeric_limits<double>::infinity();
    // On a cyclic path the window may cover a segment once per lap copy.
    const int first_lap = cyclic_ ? static_cast<int>(std::floor(lo / L)) : 0;
    const int last_lap = cyclic_ ? static_cast<int>(std::floor(hi / L)) : 0;
    for (int lap = first_lap; lap <= last_lap; ++lap) {
        const double base = lap * L;
        for (std::size_t i = 0; i < segment_count(); ++i) {
            const double s0 = base + cum_[i];
            const double s1 = base + cum_[i + 1];
            if (s1 < lo || s0 > hi) continue;
            const Vec2 a = segment_start(i);
            const Vec2 b = segment_end(i);
            const double seg = s1 - s0;
            double u = segment_param(a, b, p);
            u = std::clamp(u, std::max(0.0, (lo - s0) / seg), std::min(1.0, (hi - s0) / seg));
            const Vec2 q = a + (b - a) * u;
            const double d = distance(q, p);
            if (d < best.distance) {
                best.distance = d;
                best.point = q;
                best.offset = s0 + u * seg - hint;
                best.s = wrap(s0 + u * seg);
                best.lateral = (b - a).cross(p - a) >= 0.0 ? d : -d;
            }
        }
    }
    return best;
}

Lookahead lookahead_point(const WaypointPath& path, const Vec2& position, double lookahead) {
    if (!(lookahead > 0.0)) throw ValidationError("lookahead distance must be positive");
    const auto proj = path.project(position);
    if (proj.distance > 5.0 * lookahead) {
        throw OffPathError("position is " + std::to_string(proj.distance) + " m from the path (limit " +
                           std::to_string(5.0 * lookahead) + " m)");
    }
    const double target = path.wrap(proj.s + lookahead);
    return {path.point_at(target), proj.s, target, proj.distance};
}

PathTracker::PathTracker(WaypointPath path, double lookahead) : path_(std::move(path)), lookahead_(lookahead) {
    if (!(lookahead > 0.0)) throw ValidationError("lookahead distance must be positive");
}

Lookahead PathTracker::update(const Vec2& position) {
    if (!s_) {
        const Lookahead first = lookahead_point(path_, position, lookahead_);
        s_ = first.s_projection;
        return first;
    }
    const auto proj = path_.project_near(position, *s_, 2.0, 5.0 * lookahead_ + 5.0);
    if (proj.distance > 5.0 * lookahead_) {
        throw OffPathError("position is " + std::to_string(proj.distance) + " m from the path (limit " +
                           std::to_string(5.0 * lookahead_) + " m)");
    }
    if (proj.offset > 0.0) {
        progress_ += proj.offset;
        s_ = proj.s;
    }
    const double target = path_.wrap(*s_ + lookahead_);
    return {path_.point_at(target), *s_, target, proj.distance};
}

int PathTracker::laps() const noexcept {
    if (!path_.cyclic()) return 0;
    return static_cast<int>(std::floor(progress_ / path_.length()));
}

}  // namespace viltwin::control
