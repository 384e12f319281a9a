#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "viltwin/core/bag.hpp"
#include "viltwin/core/error.hpp"
#include "viltwin/dynamics/kinematic.hpp"
#include "viltwin/safety/bounded_check.hpp"
#include "viltwin/safety/gr1_solver.hpp"
#include "viltwin/safety/gr1_spec.hpp"
#include "viltwin/safety/rule_filter.hpp"
#include "viltwin/safety/strategy.hpp"
#include "viltwin/sim/compare.hpp"
#include "viltwin/sim/engine.hpp"
#include "viltwin/sim/lights.hpp"
#include "viltwin/sim/scenario.hpp"
#include "viltwin/twin/network.hpp"
#include "viltwin/twin/weights_io.hpp"

namespace py = pybind11;
using namespace viltwin;

namespace {

using State = std::tuple<double, double, double, double>;

dynamics::VehicleState to_state(const State& s) {
    return {std::get<0>(s), std::get<1>(s), std::get<2>(s), std::get<3>(s)};
}

State from_state(const dynamics::VehicleState& s) { return {s.x, s.y, s.theta, s.v}; }

dynamics::KinematicParams params(double wheelbase, double kp, double kd, double v_max) {
    dynamics::KinematicParams p;
    p.wheelbase = wheelbase;
    p.kp = kp;
    p.kd = kd;
    p.v_max = v_max;
    p.validate();
    return p;
}

safety::FilterConfig filter(double d_det, double d_emr) {
    safety::FilterConfig c;
    c.d_det = d_det;
    c.d_emr = d_emr;
    c.validate();
    return c;
}

// Metrics, specs and strategies cross the boundary as JSON text; the Python
// side decodes them.
std::string run(const std::string& scenario, double duration, std::uint64_t seed, std::optional<std::string> bag) {
    const auto sc = sim::load_scenario(scenario);
    sim::EngineOptions opt;
    opt.duration = duration;
    opt.seed = seed;
    if (bag) opt.bag_path = *bag;
    py::gil_scoped_release release;
    return sim::metrics_to_json(sim::engine_run(sc, opt).metrics).dump();
}

py::dict synthesize() {
    const auto res = safety::solve_gr1(safety::build_paper_spec());
    py::dict out;
    out["realizable"] = res.realizable;
    out["reason"] = res.reason;
    out["winning_positions"] = res.winning_positions;
    out["strategy"] = res.strategy ? safety::strategy_to_json(*res.strategy).dump() : std::string();
    return out;
}

class Shield {
public:
    Shield() : strategy_(*safety::solve_gr1(safety::build_paper_spec()).strategy), shield_(strategy_) {}

    std::string step(bool urg, bool wrn) {
        const auto d = shield_.step({urg, wrn});
        if (d.assumption_violated) PyErr_WarnEx(PyExc_RuntimeWarning, d.diagnostic.c_str(), 1);
        return std::string(safety::to_string(d.state));
    }

private:
    safety::Strategy strategy_;
    safety::DriveShield shield_;
};

class Twin {
public:
    explicit Twin(const std::string& path) : net_(twin::load_weights(path)) {}
    int window() const { return net_.shape.window; }
    double predict(const std::vector<double>& u, const std::vector<double>& v) const {
        return twin::forward(net_, {u, v});
    }

private:
    twin::TwinNetwork net_;
};

std::string trace_csv(const std::string& bag) {
    std::ostringstream out;
    sim::write_trace_csv(out, bag_read(bag));
    return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "viltwin native core";

    // Translators run newest first, so the base class goes in before the subclass.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

    m.def("kinematic_step",
          [](const State& s, double delta, double accel, double dt, double wheelbase, double v_max) {
              return from_state(dynamics::kinematic_step(to_state(s), delta, accel, dt,
                                                         params(wheelbase, 2.0, 0.1, v_max)));
          },
          py::arg("state"), py::arg("delta"), py::arg("accel"), py::arg("dt"), py::arg("wheelbase") = 0.32,
          py::arg("v_max") = 4.0);
    m.def("pd_accel",
          [](double u, double v, double u_prev, double v_prev, double dt, double kp, double kd) {
              return dynamics::pd_accel(u, v, {u_prev, v_prev}, dt, params(0.32, kp, kd, 4.0)).accel;
          },
          py::arg("u"), py::arg("v"), py::arg("u_prev"), py::arg("v_prev"), py::arg("dt"), py::arg("kp") = 2.0,
          py::arg("kd") = 0.1);
    m.def("rule_filter",
          [](double v_cmd, std::optional<double> d, double d_det, double d_emr) {
              return safety::rule_filter(v_cmd, d, filter(d_det, d_emr));
          },
          py::arg("v_cmd"), py::arg("d"), py::arg("d_det") = 15.0, py::arg("d_emr") = 10.0);
    m.def("flags_from_distance",
          [](std::optional<double> d, double d_det, double d_emr) {
              const auto f = safety::flags_from_distance(d, filter(d_det, d_emr));
              return std::make_tuple(f.urg, f.wrn);
          },
          py::arg("d"), py::arg("d_det") = 15.0, py::arg("d_emr") = 10.0);
    m.def("light_color",
          [](double t, double red, double yellow, double green) {
              sim::LightSchedule s;
              s.red = red;
              s.yellow = yellow;
              s.green = green;
              s.validate();
              return std::string(to_string(sim::light_color(s, t)));
          },
          py::arg("t"), py::arg("red") = 5.0, py::arg("yellow") = 2.0, py::arg("green") = 10.0);
    m.def("paper_spec", [] { return safety::spec_to_json(safety::build_paper_spec()).dump(); });
    m.def("synthesize", &synthesize);
    m.def("check_paper_strategy", [](int horizon) {
        const auto spec = safety::build_paper_spec();
        const auto res = safety::solve_gr1(spec);
        return safety::bounded_check(*res.strategy, spec, horizon).ok();
    });
    m.def("run", &run, py::arg("scenario"), py::arg("duration") = 120.0, py::arg("seed") = 0,
          py::arg("bag") = std::nullopt);
    m.def("compare_bags",
          [](const std::string& a, const std::string& b, int vehicle) {
              const auto e = sim::compare_models(bag_read(a), bag_read(b), vehicle);
              return std::make_tuple(e.position_rmse, e.velocity_mse);
          },
          py::arg("a"), py::arg("b"), py::arg("vehicle"));
    m.def("trace_csv", &trace_csv, py::arg("bag"));

    py::class_<Shield>(m, "Shield").def(py::init<>()).def("step", &Shield::step, py::arg("urg"), py::arg("wrn"));
    py::class_<Twin>(m, "Twin")
        .def(py::init<const std::string&>(), py::arg("weights"))
        .def_property_readonly("window", &Twin::window)
        .def("predict", &Twin::predict, py::arg("u"), py::arg("v"));
}
