#pragma once

#include <optional>
#include <vector>

#include "viltwin/core/error.hpp"
#include "viltwin/core/vec2.hpp"

namespace viltwin::control {

/// The vehicle is too far from its path to track it.
class OffPathError : public Error {
public:
    using Error::Error;
};

/// Polyline with arc-length parametrisation. A cyclic path closes from the
/// last point back to the first.
class WaypointPath {
public:
    /// Throws ValidationError for fewer than 2 points, repeated consecutive
    /// points or non-finite coordinates.
    WaypointPath(std::vector<Vec2> points, bool cyclic);

    const std::vector<Vec2>& points() const noexcept { return pts_; }
    bool cyclic() const noexcept { return cyclic_; }
    double length() const noexcept { return cum_.back(); }
    std::size_t segment_count() const noexcept { return cum_.size() - 1; }

    /// Maps s into [0, length) on cyclic paths, clamps on open ones.
    double wrap(double s) const;
    Vec2 point_at(double s) const;
    /// Direction of travel at s [rad].
    double heading_at(double s) const;

    /// Arc length travelled going forward from `from` to `to`; on cyclic
    /// paths this is in [0, length).
    double forward_distance(double from, double to) const;

    struct Projection {
        double s = 0.0;         ///< arc length of the closest point, wrapped
        double offset = 0.0;    ///< signed arc length from the hint (project_near only)
        double distance = 0.0;  ///< Euclidean distance to the path
        double lateral = 0.0;   ///< signed, positive to the left of travel
        Vec2 point;
    };

    Projection project(const Vec2& p) const;
    /// Closest point restricted to arc lengths in [hint - back, hint + ahead].
    Projection project_near(const Vec2& p, double hint, double back, double ahead) const;

    friend bool operator==(const WaypointPath& a, const WaypointPath& b) {
        return a.pts_ == b.pts_ && a.cyclic_ == b.cyclic_;
    }

private:
    Vec2 segment_start(std::size_t i) const { return pts_[i]; }
    Vec2 segment_end(std::size_t i) const { return pts_[(i + 1) % pts_.size()]; }

    std::vector<Vec2> pts_;
    bool cyclic_;
    std::vector<double> cum_;  // arc length at the start of each segment, plus the total
};

struct Lookahead {
    Vec2 point;
    double s_projection = 0.0;  ///< arc length of the closest path point
    double s_target = 0.0;      ///< arc length of the lookahead point (wrapped)
    double distance_to_path = 0.0;
};

/// Point at arc length L_d past the closest projection of `position`.
/// Throws OffPathError when the position is more than 5 L_d from the path.
Lookahead lookahead_point(const WaypointPath& path, const Vec2& position, double lookahead);

/// Per-vehicle odometry along a path. Projections search a window around the
/// previous one, so the tracker never jumps to a distant branch, and the
/// unwrapped progress never decreases.
class PathTracker {
public:
    PathTracker(WaypointPath path, double lookahead);

    Lookahead update(const Vec2& position);

    const WaypointPath& path() const noexcept { return path_; }
    double lookahead() const noexcept { return lookahead_; }
    /// Arc length along the path at the last update, wrapped.
    double s() const noexcept { return s_.value_or(0.0); }
    bool warm() const noexcept { return s_.has_value(); }
    /// Distance travelled along the path since the first update.
    double progress() const noexcept { return progress_; }
    /// Completed laps of a cyclic path.
    int laps() const noexcept;

private:
    WaypointPath path_;
    double lookahead_;
    std::optional<double> s_;
    double progress_ = 0.0;
};

}  // namespace viltwin::control
