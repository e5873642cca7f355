#include "homopt/cli.h"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "homopt/config.h"
#include "homopt/errors.h"
#include "homopt/reproduce.h"
#include "homopt/sim.h"
#include "homopt/synthesis.h"
#include "homopt/verify.h"

namespace homopt::cli {

using nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 42;
  bool seed_set = false;
  std::optional<int> budget;
  std::optional<double> tol;
  std::string out;
  bool json_out = false;
};

json ToJson(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec FromStd(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string Timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json Report(const std::string& command, const Globals& g, std::uint64_t seed) {
  json r;
  r["tool"] = "homopt";
  r["version"] = kVersion;
  r["command"] = command;
  r["timestamp"] = Timestamp();
  r["seed"] = seed;
  json ov = json::object();
  if (g.budget) ov["budget"] = *g.budget;
  if (g.tol) ov["tol"] = *g.tol;
  if (g.seed_set) ov["seed"] = g.seed;
  r["overrides"] = ov;
  return r;
}

json VerdictJson(const VerificationReport& v) {
  json j;
  j["name"] = v.name;
  j["pass"] = v.pass;
  j["extremal_value"] = v.extremal_value;
  j["extremal_point"] = ToJson(v.extremal_point);
  j["tolerance"] = v.tolerance;
  j["budget"] = v.budget;
  if (!v.detail.empty()) j["detail"] = v.detail;
  for (const auto& [k, x] : v.extras) j["extras"][k] = x;
  return j;
}

json ConstantsJson(const SphereConstants& c) {
  json j;
  j["c1"] = c.c1;
  if (c.c1_h) j["c1_h"] = *c.c1_h;
  j["c2"] = c.c2;
  j["c3"] = c.c3;
  j["c4"] = c.c4;
  j["c5"] = c.c5;
  j["c6"] = c.c6;
  j["c7"] = c.c7;
  j["c8"] = c.c8;
  j["c9"] = c.c9;
  j["rho1"] = c.rho1;
  j["rho2"] = c.rho2;
  j["rho3"] = c.rho3;
  j["rho4"] = c.rho4;
  j["rho"] = c.rho;
  j["rho_m"] = c.rho_m;
  j["kappa_c"] = c.kappa_c;
  j["kappa1"] = c.kappa1;
  for (const auto& [k, p] : c.argpoints) j["argpoints"][k] = ToJson(p);
  j["n_evals"] = c.n_evals;
  return j;
}

json ControllerJson(const SynthesizedController& s) {
  json j;
  j["constants"] = ConstantsJson(s.constants);
  j["kappa"] = s.kappa;
  j["kappa_selected"] = s.kappa_selected;
  j["beta"] = s.beta;
  j["lambda"] = s.lambda;
  j["c10"] = s.c10;
  j["gamma"] = {{"a", s.gamma.a()}, {"p", s.gamma.p()}};
  j["gamma0"] = {{"a", s.gamma0.a()}, {"p", s.gamma0.p()}};
  j["min_aux_decrease"] = s.min_aux_decrease;
  for (const char* name : {"phi", "alpha_s", "alpha", "alpha_star", "R", "R1", "R2", "E", "l",
                           "l_bar", "H_kappa"}) {
    auto it = s.expressions.find(name);
    j["expressions"][name] = it == s.expressions.end() ? json("numeric") : json(it->second);
  }
  return j;
}

json GainJson(const GainMarginResult& gm) {
  return {{"gain", gm.gain},
          {"min_decrease", gm.min_decrease},
          {"argpoint", ToJson(gm.argpoint)},
          {"asserted", gm.asserted},
          {"pass", gm.pass}};
}

void Emit(const json& report, const Globals& g, std::ostream& out, const std::string& summary,
          const std::string& report_path) {
  const std::string text = report.dump(2) + "\n";
  if (!report_path.empty()) WriteFileAtomic(report_path, text);
  if (g.json_out) {
    out << text;
  } else {
    out << summary;
  }
}

ProjectConfig Load(const std::string& path, const Globals& g) {
  ProjectConfig c = LoadConfig(path);
  if (g.seed_set) c.seed = g.seed;
  if (g.budget) {
    c.budget = *g.budget;
    c.pd_budget = *g.budget;
  }
  return c;
}

SphereBudget PdBudget(const ProjectConfig& c) {
  SphereBudget b;
  b.samples = c.pd_budget;
  return b;
}

int CmdValidate(const std::string& path, const Globals& g, std::ostream& out) {
  const ProjectConfig c = Load(path, g);
  const HomogeneousSystem sys = BuildSystem(c);
  const LyapunovCandidate lyap = BuildLyapunov(c);
  const ValidationReport v = ValidateSystem(sys, lyap, 64, g.tol.value_or(1e-8), c.seed);
  json r = Report("validate", g, c.seed);
  r["config"] = c.raw;
  json checks = json::array();
  std::ostringstream s;
  for (const auto& ch : v.checks) {
    checks.push_back({{"name", ch.name}, {"pass", ch.pass}, {"max_error", ch.max_error},
                      {"detail", ch.detail}});
    s << (ch.pass ? "  ok    " : "  FAIL  ") << ch.name;
    if (!ch.pass && !ch.detail.empty()) s << ": " << ch.detail;
    s << "\n";
  }
  r["result"] = {{"checks", checks}, {"pass", v.pass}, {"synthesizable", v.synthesizable},
                 {"note", v.note}};
  r["pass"] = v.pass;
  s << "validate: " << (v.pass ? "pass" : "fail");
  if (!v.note.empty()) s << " (" << v.note << ")";
  s << "\n";
  Emit(r, g, out, s.str(), g.out);
  return v.pass ? kPass : kDomainFailure;
}

SynthesizedController SynthesizeFrom(const ProjectConfig& c) {
  return Synthesize(BuildSystem(c), BuildLyapunov(c), BuildSynthesisConfig(c));
}

int SynthesisFailure(const std::string& command, const ProjectConfig& c, const Globals& g,
                     const std::string& stage, const std::string& what, std::ostream& out,
                     std::ostream& err) {
  json r = Report(command, g, c.seed);
  r["config"] = c.raw;
  r["result"] = {{"stage", stage}, {"error", what}};
  r["pass"] = false;
  Emit(r, g, out, "", g.out);
  err << command << " failed: " << what << "\n";
  return kDomainFailure;
}

int CmdSynthesize(const std::string& path, const Globals& g, std::ostream& out,
                  std::ostream& err) {
  const ProjectConfig c = Load(path, g);
  SynthesizedController s;
  try {
    s = SynthesizeFrom(c);
  } catch (const SynthesisError& e) {
    return SynthesisFailure("synthesize", c, g, e.stage(), e.what(), out, err);
  }
  json r = Report("synthesize", g, c.seed);
  r["config"] = c.raw;
  r["result"] = ControllerJson(s);
  r["pass"] = true;
  std::ostringstream os;
  const auto& k = s.constants;
  os << "synthesize: ok\n"
     << "  rho1=" << k.rho1 << " rho2=" << k.rho2 << " rho3=" << k.rho3 << " rho4=" << k.rho4
     << " rho=" << k.rho << " rho_m=" << k.rho_m << "\n"
     << "  kappa_c=" << k.kappa_c << " kappa1=" << k.kappa1 << " kappa=" << s.kappa
     << " (selected " << s.kappa_selected << ")\n"
     << "  gamma(s)=" << s.gamma.a() << "*s^" << s.gamma.p() << " gamma0(s)=" << s.gamma0.a()
     << "*s^" << s.gamma0.p() << "\n";
  if (auto it = s.expressions.find("alpha_star"); it != s.expressions.end()) {
    os << "  alpha*(x) = " << it->second << "\n";
  }
  Emit(r, g, out, os.str(), g.out);
  return kPass;
}

std::vector<Vec> HjiPoints(const ProjectConfig& c, const HomogeneousNorm& norm) {
  std::vector<Vec> pts;
  for (const auto& p : c.hji_points) pts.push_back(FromStd(p));
  if (pts.empty()) {
    for (const SpherePoint& p : SphereSample(norm, 2 * norm.dim(), c.seed)) pts.push_back(p.coords);
  }
  return pts;
}

int CmdVerify(const std::string& path, const Globals& g, std::ostream& out, std::ostream& err) {
  const ProjectConfig c = Load(path, g);
  const HomogeneousSystem sys = BuildSystem(c);
  const LyapunovCandidate lyap = BuildLyapunov(c);
  json r = Report("verify", g, c.seed);
  r["config"] = c.raw;
  std::ostringstream os;
  bool pass = true;
  json checks = json::array();
  auto add = [&](const VerificationReport& v) {
    checks.push_back(VerdictJson(v));
    pass = pass && v.pass;
    os << (v.pass ? "  ok    " : "  FAIL  ") << v.name << ": extremal " << v.extremal_value;
    if (!v.detail.empty()) os << " (" << v.detail << ")";
    os << "\n";
  };
  auto hji = [&](const LieDerivatives& lie, const CostPieces& cost, const HomogeneousNorm& norm) {
    const auto pts = HjiPoints(c, norm);
    const auto res = HjiResidual(sys, lie, cost, pts);
    for (size_t i = 0; i < pts.size(); ++i) {
      r["result"]["hji_residual"].push_back({{"x", ToJson(pts[i])}, {"residual", res[i]}});
    }
  };

  if (!(sys.theta > 0.0)) {
    // Fixture mode: nothing to synthesize, only the supplied cost is examined.
    const auto cost = BuildCost(c);
    if (!cost) {
      return SynthesisFailure("verify", c, g, "precondition",
                              "non-synthesizable: theta=0 and no cost block to check", out, err);
    }
    const HomogeneousNorm norm = NormFor(sys, lyap);
    try {
      add(CheckPdOnSphere("l positive definite", cost->l, norm, 2.0 * sys.kr0(), PdBudget(c),
                          c.seed));
    } catch (const DomainError& e) {
      VerificationReport v;
      v.name = "l positive definite";
      v.detail = e.what();
      add(v);
    }
    hji(LieDerivatives(sys, lyap), *cost, norm);
  } else {
    SynthesizedController s;
    try {
      s = SynthesizeFrom(c);
    } catch (const SynthesisError& e) {
      return SynthesisFailure("verify", c, g, e.stage(), e.what(), out, err);
    }
    const double deg = 2.0 * sys.kr0();
    add(CheckPdOnSphere("H_kappa positive definite", s.H_kappa, s.norm, deg, PdBudget(c), c.seed));
    add(CheckPdOnSphere("l positive definite", s.l, s.norm, deg, PdBudget(c), c.seed));
    DissipationSampling plan;
    plan.samples = c.dissipation_samples;
    plan.seed = c.seed;
    plan.rel_tol = g.tol.value_or(c.rel_tol);
    add(CheckIssDissipation(s, plan));
    std::optional<Vec> x0;
    if (!c.x0.empty()) x0 = FromStd(c.x0[0]);
    add(CheckIosDissipation(s, plan, x0));
    for (const auto& gm : GainMarginSweep(sys, *s.lie, s.alpha_star, s.beta, c.gains, s.norm,
                                          PdBudget(c), c.seed)) {
      r["result"]["gain_margin"].push_back(GainJson(gm));
      pass = pass && gm.pass;
      os << "  " << (gm.pass ? "ok    " : "FAIL  ") << "gain " << gm.gain << ": min decrease "
         << gm.min_decrease << (gm.asserted ? "" : " (not asserted)") << "\n";
    }
    hji(*s.lie, CostFromController(s), s.norm);
    r["result"]["kappa"] = s.kappa;
  }
  r["result"]["checks"] = checks;
  r["pass"] = pass;
  os << "verify: " << (pass ? "pass" : "fail") << "\n";
  Emit(r, g, out, os.str(), g.out);
  return pass ? kPass : kDomainFailure;
}

int CmdSimulate(const std::string& path, const Globals& g, std::ostream& out, std::ostream& err) {
  const ProjectConfig c = Load(path, g);
  if (c.x0.empty()) throw ConfigError("simulate.x0 is empty");
  const HomogeneousSystem sys = BuildSystem(c);
  const LyapunovCandidate lyap = BuildLyapunov(c);
  std::shared_ptr<const LieDerivatives> lie = std::make_shared<const LieDerivatives>(sys, lyap);

  ScalarFn controller;
  std::optional<CostPieces> cost = BuildCost(c);
  std::optional<PowerKInfinity> gamma;
  if (c.controller == "synthesized") {
    SynthesizedController s;
    try {
      s = SynthesizeFrom(c);
    } catch (const SynthesisError& e) {
      return SynthesisFailure("simulate", c, g, e.stage(), e.what(), out, err);
    }
    controller = s.alpha_star;
    if (!cost) cost = CostFromController(s);
    gamma = s.gamma;
    lie = s.lie;
  } else {
    const Expr u = Parse(c.controller, sys.n);
    controller = [u](const Vec& x) { return u.Eval(x); };
  }

  IntegrateOptions opt;
  opt.tol = g.tol.value_or(c.integrator_tol);
  const std::filesystem::path dir = g.out.empty() ? "." : g.out;
  const std::string stem = c.name.empty() ? "traj" : c.name;
  json r = Report("simulate", g, c.seed);
  r["config"] = c.raw;
  r["result"]["trajectories"] = json::array();
  std::ostringstream os;
  const ScalarFn value = [lie](const Vec& x) { return lie->V(x); };
  for (size_t i = 0; i < c.x0.size(); ++i) {
    const Vec x0 = FromStd(c.x0[i]);
    for (size_t j = 0; j < c.disturbances.size(); ++j) {
      const DisturbanceSpec w = BuildDisturbance(c.disturbances[j], sys, lie, gamma);
      const Trajectory tr = Integrate(sys, controller, w, x0, c.T, opt, value);
      std::vector<double> running;
      json entry;
      entry["x0"] = ToJson(x0);
      entry["disturbance"] = w.Describe();
      entry["nodes"] = tr.times.size();
      entry["rk_steps"] = tr.rk_steps;
      entry["terminated_at_origin"] = tr.terminated_at_origin;
      entry["final_state"] = ToJson(tr.states.back());
      const L2GainReport l2 = L2GainCheck(tr, 0.0, 0.0, 0.0);
      entry["y_l2"] = l2.y_norm;
      entry["w_l2"] = l2.w_norm;
      if (cost) {
        const CostBreakdown cb = EvaluateCost(tr, *cost);
        running = cb.running_J;
        entry["cost"] = {{"J", cb.J},
                         {"terminal", cb.terminal},
                         {"int_l", cb.int_l},
                         {"int_uR1u", cb.int_uR1u},
                         {"int_yR2y", cb.int_yR2y},
                         {"int_gamma0", cb.int_gamma0}};
      }
      const std::string file = stem + "_x" + std::to_string(i) + "_w" + std::to_string(j) + ".csv";
      WriteFileAtomic((dir / file).string(), TrajectoryCsv(tr, running));
      entry["csv"] = file;
      os << "  " << file << ": " << tr.times.size() << " nodes, x(T)="
         << FormatPoint(tr.states.back());
      if (cost) os << ", J=" << entry["cost"]["J"].get<double>();
      os << "\n";
      r["result"]["trajectories"].push_back(entry);
    }
  }
  r["pass"] = true;
  os << "simulate: wrote " << r["result"]["trajectories"].size() << " trajectories to "
     << dir.string() << "\n";
  Emit(r, g, out, os.str(), (dir / (stem + "_report.json")).string());
  return kPass;
}

int CmdReproduce(const std::string& example, const Globals& g, std::ostream& out) {
  const std::vector<int> ids = CriteriaFor(example);
  json r = Report("reproduce", g, g.seed);
  r["example"] = example;
  std::ostringstream os;
  bool pass = true;
  std::vector<int> failing;
  for (int id : ids) {
    const CriterionResult c = RunCriterion(id, g.seed);
    json j;
    j["id"] = c.id;
    j["title"] = c.title;
    j["pass"] = c.pass;
    j["detail"] = c.detail;
    j["seconds"] = c.seconds;
    j["time_limit"] = c.time_limit;
    for (const auto& [k, v] : c.values) j["values"][k] = v;
    r["result"]["criteria"].push_back(j);
    pass = pass && c.pass;
    if (!c.pass) failing.push_back(id);
    os << "criterion " << std::setw(2) << std::setfill('0') << c.id << std::setfill(' ') << " "
       << (c.pass ? "PASS" : "FAIL") << "  " << c.title;
    if (!c.detail.empty()) os << ": " << c.detail;
    os << "\n";
    for (const auto& [k, v] : c.values) {
      os << "    " << k << " = " << std::setprecision(10) << v << "\n";
    }
  }
  if (example != "all" && example != "props") {
    for (const auto& [k, v] : Diagnostics(example, g.seed)) {
      r["result"]["diagnostics"][k] = v;
      os << "  diagnostic " << k << " = " << std::setprecision(10) << v << "\n";
    }
  }
  r["pass"] = pass;
  os << "reproduce " << example << ": ";
  if (pass) {
    os << "pass\n";
  } else {
    os << "failing criteria";
    for (int id : failing) os << " " << id;
    os << "\n";
  }
  Emit(r, g, out, os.str(), g.out);
  return pass ? kPass : kDomainFailure;
}

int CmdSweepGain(const std::string& path, std::vector<double> gains, const Globals& g,
                 std::ostream& out, std::ostream& err) {
  const ProjectConfig c = Load(path, g);
  if (gains.empty()) gains = c.gains;
  SynthesizedController s;
  try {
    s = SynthesizeFrom(c);
  } catch (const SynthesisError& e) {
    return SynthesisFailure("sweep-gain", c, g, e.stage(), e.what(), out, err);
  }
  json r = Report("sweep-gain", g, c.seed);
  r["config"] = c.raw;
  std::ostringstream os;
  bool pass = true;
  for (const auto& gm : GainMarginSweep(s.system, *s.lie, s.alpha_star, s.beta, gains, s.norm,
                                        PdBudget(c), c.seed)) {
    r["result"]["gain_margin"].push_back(GainJson(gm));
    pass = pass && gm.pass;
    os << "  gain " << gm.gain << ": min decrease " << gm.min_decrease;
    if (!gm.asserted) {
      os << "  (outside (1/beta, inf), not asserted)";
    } else if (!gm.pass) {
      os << "  FAIL";
    }
    os << "\n";
  }
  r["result"]["beta"] = s.beta;
  r["pass"] = pass;
  os << "sweep-gain: " << (pass ? "pass" : "fail") << "\n";
  Emit(r, g, out, os.str(), g.out);
  return pass ? kPass : kDomainFailure;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Homogeneous inverse-optimal ISS controller synthesis and verification"};
  app.name("homopt");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed for sampled certificates")->default_val(42);
  app.add_option("--budget", g.budget, "Sphere sample budget")->check(CLI::PositiveNumber);
  app.add_option("--tol", g.tol, "Tolerance override")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Report path (output directory for simulate)");
  app.add_flag("--json", g.json_out, "Print the JSON report to stdout");

  std::string config, example;
  std::vector<double> gains;
  auto* validate = app.add_subcommand("validate", "Check homogeneity and Lyapunov conditions");
  validate->add_option("config", config)->required();
  auto* synthesize = app.add_subcommand("synthesize", "Run the synthesis pipeline");
  synthesize->add_option("config", config)->required();
  auto* verify = app.add_subcommand("verify", "Synthesize and certify the bundle");
  verify->add_option("config", config)->required();
  auto* simulate = app.add_subcommand("simulate", "Integrate closed-loop trajectories to CSV");
  simulate->add_option("config", config)->required();
  auto* reproduce = app.add_subcommand("reproduce", "Run the built-in example suites");
  reproduce->add_option("example", example, "ex1, ex2, ex3, ex4, props or all")
      ->required()
      ->check(CLI::IsMember({"ex1", "ex2", "ex3", "ex4", "props", "all"}));
  auto* sweep = app.add_subcommand("sweep-gain", "Closed-loop decrease under scaled feedback");
  sweep->add_option("config", config)->required();
  sweep->add_option("--gains", gains, "Comma-separated gains")->delimiter(',');
  for (auto* sub : {validate, synthesize, verify, simulate, reproduce, sweep}) sub->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  g.seed_set = app.get_option("--seed")->count() > 0;

  try {
    if (*validate) return CmdValidate(config, g, out);
    if (*synthesize) return CmdSynthesize(config, g, out, err);
    if (*verify) return CmdVerify(config, g, out, err);
    if (*simulate) return CmdSimulate(config, g, out, err);
    if (*reproduce) return CmdReproduce(example, g, out);
    if (*sweep) return CmdSweepGain(config, gains, g, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDomainFailure;
  }
  return kUsageError;
}

int Run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return Run(args, std::cout, std::cerr);
}

}  // namespace homopt::cli
