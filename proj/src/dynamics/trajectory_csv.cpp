#include "viltwin/dynamics/trajectory_csv.hpp"

#include <cstdio>
#include <fstream>

#include "viltwin/core/error.hpp"

namespace viltwin::dynamics {

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    out << "t,x,y,theta,v\n";
    char buf[160];
    for (const auto& p : trajectory) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", p.t, p.state.x, p.state.y,
                      p.state.theta, p.state.v);
        out << buf;
    }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_trajectory_csv(out, trajectory);
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace viltwin::dynamics
