#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "homopt/cli.h"
#include "homopt/config.h"
#include "homopt/errors.h"
#include "homopt/homogeneity.h"
#include "homopt/lft.h"
#include "homopt/reproduce.h"
#include "homopt/sim.h"
#include "homopt/synthesis.h"
#include "homopt/sysdef.h"

namespace py = pybind11;
using namespace homopt;

namespace {

py::dict ConstantsDict(const SphereConstants& c) {
  py::dict d;
  d["c1"] = c.c1;
  d["c2"] = c.c2;
  d["c3"] = c.c3;
  d["c4"] = c.c4;
  d["c5"] = c.c5;
  d["c6"] = c.c6;
  d["c7"] = c.c7;
  d["c8"] = c.c8;
  d["c9"] = c.c9;
  d["rho1"] = c.rho1;
  d["rho2"] = c.rho2;
  d["rho3"] = c.rho3;
  d["rho4"] = c.rho4;
  d["rho"] = c.rho;
  d["rho_m"] = c.rho_m;
  d["kappa_c"] = c.kappa_c;
  d["kappa1"] = c.kappa1;
  return d;
}

SynthesizedController SynthesizeExample(const std::string& id) {
  const ExampleFixture fx = BuiltinExample(id);
  return Synthesize(fx.system, fx.lyapunov, ConfigFromFixture(fx));
}

SynthesizedController SynthesizeConfig(const std::string& path) {
  const ProjectConfig c = LoadConfig(path);
  return Synthesize(BuildSystem(c), BuildLyapunov(c), BuildSynthesisConfig(c));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = cli::kVersion;

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<SynthesisError>(m, "SynthesisError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  m.def(
      "hom_norm",
      [](const std::vector<double>& weights, double nu, const Vec& x) {
        return HomoNorm(HomogeneousNorm(Dilation(weights), nu), x);
      },
      py::arg("weights"), py::arg("nu"), py::arg("x"));
  m.def(
      "dilate",
      [](const std::vector<double>& weights, double eps, const Vec& x) {
        return ApplyDilation(Dilation(weights), eps, x);
      },
      py::arg("weights"), py::arg("eps"), py::arg("x"));

  m.def(
      "lf_transform",
      [](double a, double p) {
        const PowerKInfinity l = LfTransform(PowerKInfinity(a, p));
        return std::make_pair(l.a(), l.p());
      },
      py::arg("a"), py::arg("p"));

  m.def(
      "parse_expr",
      [](const std::string& text, int n) {
        const Expr e = Parse(text, n);
        return py::cpp_function([e](const Vec& x) { return e.Eval(x); });
      },
      py::arg("text"), py::arg("n"));

  py::class_<SynthesizedController>(m, "Controller")
      .def_readonly("kappa", &SynthesizedController::kappa)
      .def_readonly("kappa_selected", &SynthesizedController::kappa_selected)
      .def_readonly("beta", &SynthesizedController::beta)
      .def_readonly("lambda_", &SynthesizedController::lambda)
      .def_readonly("expressions", &SynthesizedController::expressions)
      .def_readonly("min_aux_decrease", &SynthesizedController::min_aux_decrease)
      .def_property_readonly("constants",
                             [](const SynthesizedController& s) { return ConstantsDict(s.constants); })
      .def_property_readonly("gamma",
                             [](const SynthesizedController& s) {
                               return std::make_pair(s.gamma.a(), s.gamma.p());
                             })
      .def("alpha_star", [](const SynthesizedController& s, const Vec& x) { return s.alpha_star(x); })
      .def("alpha", [](const SynthesizedController& s, const Vec& x) { return s.alpha(x); })
      .def("R", [](const SynthesizedController& s, const Vec& x) { return s.R(x); })
      .def("l", [](const SynthesizedController& s, const Vec& x) { return s.l(x); })
      .def("H_kappa", [](const SynthesizedController& s, const Vec& x) { return s.H_kappa(x); })
      .def("V", [](const SynthesizedController& s, const Vec& x) { return s.lie->V(x); })
      .def("norm", [](const SynthesizedController& s, const Vec& x) { return s.norm(x); });

  m.def("synthesize_example", &SynthesizeExample, py::arg("example"));
  m.def("synthesize_config", &SynthesizeConfig, py::arg("path"));

  m.def(
      "simulate_worst_case",
      [](const SynthesizedController& s, const Vec& x0, double T, double tol) {
        const DisturbanceSpec w = DisturbanceSpec::WorstCase(s.lie, s.gamma, s.lambda);
        IntegrateOptions opt;
        opt.tol = tol;
        const auto lie = s.lie;
        const Trajectory tr =
            Integrate(s.system, s.alpha_star, w, x0, T, opt, [lie](const Vec& x) { return lie->V(x); });
        const CostBreakdown cb = EvaluateCost(tr, CostFromController(s));
        Eigen::MatrixXd states(tr.states.size(), x0.size());
        for (size_t i = 0; i < tr.states.size(); ++i) states.row(i) = tr.states[i].transpose();
        py::dict d;
        d["t"] = tr.times;
        d["x"] = states;
        d["u"] = tr.u;
        d["V"] = tr.V_vals;
        d["J"] = cb.J;
        d["running_J"] = cb.running_J;
        return d;
      },
      py::arg("controller"), py::arg("x0"), py::arg("T"), py::arg("tol") = 1e-9);

  m.def(
      "run_criterion",
      [](int id, std::uint64_t seed) {
        CriterionResult r;
        {
          py::gil_scoped_release release;
          r = RunCriterion(id, seed);
        }
        py::dict d;
        d["id"] = r.id;
        d["title"] = r.title;
        d["pass"] = r.pass;
        d["detail"] = r.detail;
        d["seconds"] = r.seconds;
        py::dict values;
        for (const auto& [k, v] : r.values) values[py::str(k)] = v;
        d["values"] = values;
        return d;
      },
      py::arg("id"), py::arg("seed") = 42);
  m.def("criteria_for", &CriteriaFor, py::arg("example"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::Run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
