#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pohozaev/config.hpp"
#include "pohozaev/harness.hpp"
#include "pohozaev/run.hpp"
#include "pohozaev/shooting.hpp"
#include "pohozaev/solver.hpp"

namespace py = pybind11;
using namespace pohozaev;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

// Node values shaped like the grid, plus the node coordinates (radii for
// radial grids, one axis vector per dimension for boxes).
py::dict profile(const GridFunction& u) {
    py::dict d;
    if (const auto* r = std::get_if<RadialGrid>(&u.grid)) {
        d["radii"] = as_array(r->radii);
        d["values"] = as_array(u.values);
        return d;
    }
    const BoxGrid& b = std::get<BoxGrid>(u.grid);
    py::list axes;
    std::vector<py::ssize_t> shape;
    for (int a = 0; a < b.dim; ++a) {
        std::vector<double> x(b.points[a]);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = b.coordinate(a, j);
        axes.append(as_array(x));
        shape.push_back(static_cast<py::ssize_t>(b.points[a]));
    }
    d["axes"] = axes;
    d["values"] = as_array(u.values).reshape(shape);
    return d;
}

py::dict report_dict(const SolveReport& r) {
    py::dict d;
    d["energy"] = r.energy;
    d["psi"] = r.psi;
    d["phi"] = r.phi;
    d["K_relative"] = r.K_relative;
    d["el_residual"] = r.el_residual;
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    d["stop"] = stop_reason_name(r.stop);
    d["monotone"] = r.monotone;
    d["solution"] = profile(r.u);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Ground states by energy minimization over the Pohozaev set";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    py::class_<RunConfig>(m, "Config")
        .def_static("parse", &parse_config, py::arg("text"), py::arg("overrides") = std::vector<std::string>{},
                    "Parse and validate YAML text; overrides are 'dotted.path=value'.")
        .def_static("load", &load_config, py::arg("path"), py::arg("overrides") = std::vector<std::string>{})
        .def("with_override", &with_override, py::arg("path"), py::arg("value"))
        .def("emit", &emit_config)
        .def_readonly("seed", &RunConfig::seed)
        .def("__eq__", [](const RunConfig& a, const RunConfig& b) { return a == b; })
        .def("__repr__", &emit_config);

    m.def(
        "solve",
        [](const RunConfig& cfg) {
            const ProblemInstance inst = cfg.instance();
            py::gil_scoped_release release;
            SolveReport rep;
            try {
                rep = solve(inst, cfg.solver);
            } catch (const NoConvergence& e) {
                rep = e.report();
            }
            py::gil_scoped_acquire acquire;
            return report_dict(rep);
        },
        py::arg("config"), "Minimize over the Pohozaev set; a stalled solve returns its last iterate with converged=False.");

    m.def(
        "check_hypotheses",
        [](const RunConfig& cfg) {
            const HypothesisReport rep = check_hypotheses(cfg.instance(), cfg.hypotheses);
            py::list out;
            for (const auto& e : rep.entries) {
                py::dict d;
                d["name"] = e.name;
                d["description"] = e.description;
                d["passed"] = e.passed;
                d["surrogate"] = e.surrogate;
                d["worst_margin"] = e.worst_margin;
                d["witness"] = e.witness;
                out.append(d);
            }
            return out;
        },
        py::arg("config"));

    m.def(
        "oracle_energy", [](int N, const std::string& nonlinearity) {
            return shooting_oracle(N, NonlinearitySpec::builtin(nonlinearity)).energy();
        },
        py::arg("N") = 3, py::arg("nonlinearity") = "cubic", "Ground-state energy of the radial shooting oracle.");

    m.def(
        "run",
        [](const RunConfig& cfg) {
            std::ostringstream log;
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run(cfg, log);
            }
            py::dict d;
            d["exit_code"] = r.exit_code;
            d["directory"] = r.directory.string();
            d["artifacts"] = r.artifacts;
            d["message"] = r.message;
            d["log"] = log.str();
            return d;
        },
        py::arg("config"), "Execute the configured command and write its artifacts.");
}
