#include "viltwin/sim/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "viltwin/core/error.hpp"

namespace viltwin::sim {

dynamics::Trajectory vehicle_trajectory(const Bag& bag, int id) {
    std::map<double, double> speed;
    for (const auto& m : bag.messages) {
        if (const auto* tw = std::get_if<TwistMsg>(&m.payload); tw && tw->id == id) speed[m.t] = tw->v;
    }
    dynamics::Trajectory out;
    double v = 0.0;
    for (const auto& m : bag.messages) {
        const auto* p = std::get_if<PoseMsg>(&m.payload);
        if (!p || p->id != id) continue;
        if (auto it = speed.find(m.t); it != speed.end()) v = it->second;
        if (!out.empty() && out.back().t == m.t) out.pop_back();
        out.push_back({m.t, {p->x, p->y, p->theta, v}});
    }
    return out;
}

namespace {

dynamics::VehicleState sample(const dynamics::Trajectory& tr, double t, std::size_t& k) {
    while (k + 1 < tr.size() && tr[k + 1].t <= t) ++k;
    if (k + 1 >= tr.size() || tr[k].t >= t) return tr[k].state;
    const auto& a = tr[k];
    const auto& b = tr[k + 1];
    const double w = (t - a.t) / (b.t - a.t);
    auto lerp = [w](double x, double y) { return x + (y - x) * w; };
    return {lerp(a.state.x, b.state.x), lerp(a.state.y, b.state.y), lerp(a.state.theta, b.state.theta),
            lerp(a.state.v, b.state.v)};
}

}  // namespace

ModelErrors compare_trajectories(const dynamics::Trajectory& a, const dynamics::Trajectory& b, double grid) {
    if (a.empty() || b.empty()) throw ValidationError("compare: empty pose stream");
    if (!(grid > 0.0)) throw ValidationError("compare: grid step must be positive");
    const double t0 = std::max(a.front().t, b.front().t);
    const double t1 = std::min(a.back().t, b.back().t);
    if (t1 < t0) throw ValidationError("compare: the streams do not overlap in time");
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / grid + 1e-9)) + 1;
    ModelErrors e;
    std::size_t ka = 0, kb = 0;
    double pos = 0.0, vel = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + grid * static_cast<double>(i);
        const auto sa = sample(a, t, ka);
        const auto sb = sample(b, t, kb);
        pos += (sa.x - sb.x) * (sa.x - sb.x) + (sa.y - sb.y) * (sa.y - sb.y);
        vel += (sa.v - sb.v) * (sa.v - sb.v);
    }
    e.samples = n;
    e.position_rmse = std::sqrt(pos / static_cast<double>(n));
    e.velocity_mse = vel / static_cast<double>(n);
    return e;
}

ModelErrors compare_models(const Bag& a, const Bag& b, int id, double grid) {
    const auto ta = vehicle_trajectory(a, id);
    const auto tb = vehicle_trajectory(b, id);
    if (ta.empty() || tb.empty()) {
        throw ValidationError("compare: no pose stream for vehicle " + std::to_string(id) +
                              (ta.empty() ? " in the first bag" : " in the second bag"));
    }
    return compare_trajectories(ta, tb, grid);
}

void write_trace_csv(std::ostream& out, const Bag& bag) {
    std::map<std::pair<int, double>, double> speed;
    for (const auto& m : bag.messages) {
        if (const auto* tw = std::get_if<TwistMsg>(&m.payload)) speed[{tw->id, m.t}] = tw->v;
    }
    std::map<int, double> last_v;
    out << "t,id,x,y,theta,v\n";
    char buf[256];
    for (const auto& m : bag.messages) {
        const auto* p = std::get_if<PoseMsg>(&m.payload);
        if (!p) continue;
        double& v = last_v[p->id];
        if (auto it = speed.find({p->id, m.t}); it != speed.end()) v = it->second;
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", m.t, p->id, p->x, p->y, p->theta, v);
        out << buf;
    }
}

}  // namespace viltwin::sim
