#include "homopt/config.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "homopt/errors.h"

namespace homopt {

using nlohmann::json;

namespace {

void AllowOnly(const json& j, const std::string& where, const std::set<std::string>& keys) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <typename T>
T Get(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing '" + key + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad '" + key + "' in " + where + ": " + e.what());
  }
}

template <typename T>
void Maybe(const json& j, const std::string& key, const std::string& where, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = Get<T>(j, key, where);
}

template <typename T>
void MaybeOpt(const json& j, const std::string& key, const std::string& where,
              std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = Get<T>(j, key, where);
}

void Finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw ConfigError(what + " must be finite");
}

void Finite(const std::vector<double>& v, const std::string& what) {
  for (double x : v) Finite(x, what);
}

std::pair<double, double> PowerLaw(const json& j, const std::string& where) {
  AllowOnly(j, where, {"a", "p"});
  return {Get<double>(j, "a", where), Get<double>(j, "p", where)};
}

Expr ParseIn(const std::string& text, int n, const std::string& what, bool allow_time = false) {
  Expr e;
  try {
    e = Parse(text, n);
  } catch (const ParseError& err) {
    throw ConfigError(what + ": " + err.what());
  }
  if (!allow_time && e.UsesTime()) throw ConfigError(what + " must not depend on t");
  return e;
}

}  // namespace

ProjectConfig ParseConfig(const json& j) {
  ProjectConfig c;
  c.raw = j;
  AllowOnly(j, "config", {"name", "system", "lyapunov", "synthesis", "verify", "simulate"});
  Maybe(j, "name", "config", c.name);

  const json& s = j.contains("system") ? j.at("system") : throw ConfigError("missing 'system'");
  AllowOnly(s, "system", {"weights", "k", "f", "G1", "G2", "h", "d", "theta"});
  c.weights = Get<std::vector<double>>(s, "weights", "system");
  c.k = Get<double>(s, "k", "system");
  c.f = Get<std::vector<std::string>>(s, "f", "system");
  c.G1 = Get<std::vector<std::string>>(s, "G1", "system");
  c.G2 = Get<std::vector<std::vector<std::string>>>(s, "G2", "system");
  c.h = Get<std::vector<std::string>>(s, "h", "system");
  c.d = Get<std::vector<double>>(s, "d", "system");
  MaybeOpt(s, "theta", "system", c.theta);
  Finite(c.weights, "system.weights");
  Finite(c.k, "system.k");
  Finite(c.d, "system.d");

  const json& l = j.contains("lyapunov") ? j.at("lyapunov") : throw ConfigError("missing 'lyapunov'");
  AllowOnly(l, "lyapunov", {"V", "degree", "nu"});
  c.V = Get<std::string>(l, "V", "lyapunov");
  c.v_degree = Get<double>(l, "degree", "lyapunov");
  c.nu = Get<double>(l, "nu", "lyapunov");

  if (j.contains("synthesis")) {
    const json& y = j.at("synthesis");
    AllowOnly(y, "synthesis", {"c10", "pi_coeff", "q0", "beta", "lambda", "kappa",
                               "kappa_margin", "known_stabilizer"});
    c.has_synthesis = true;
    Maybe(y, "c10", "synthesis", c.c10);
    MaybeOpt(y, "pi_coeff", "synthesis", c.pi_coeff);
    Maybe(y, "q0", "synthesis", c.q0);
    Maybe(y, "beta", "synthesis", c.beta);
    Maybe(y, "lambda", "synthesis", c.lambda);
    MaybeOpt(y, "kappa", "synthesis", c.kappa);
    Maybe(y, "kappa_margin", "synthesis", c.kappa_margin);
    MaybeOpt(y, "known_stabilizer", "synthesis", c.known_stabilizer);
  }

  if (j.contains("verify")) {
    const json& v = j.at("verify");
    AllowOnly(v, "verify", {"seed", "budget", "pd_budget", "dissipation_samples", "rel_tol",
                            "gains", "hji_points"});
    Maybe(v, "seed", "verify", c.seed);
    Maybe(v, "budget", "verify", c.budget);
    Maybe(v, "pd_budget", "verify", c.pd_budget);
    Maybe(v, "dissipation_samples", "verify", c.dissipation_samples);
    Maybe(v, "rel_tol", "verify", c.rel_tol);
    Maybe(v, "gains", "verify", c.gains);
    Maybe(v, "hji_points", "verify", c.hji_points);
  }

  if (j.contains("simulate")) {
    const json& m = j.at("simulate");
    AllowOnly(m, "simulate", {"x0", "T", "tol", "controller", "disturbances", "cost"});
    Maybe(m, "x0", "simulate", c.x0);
    Maybe(m, "T", "simulate", c.T);
    Maybe(m, "tol", "simulate", c.integrator_tol);
    Maybe(m, "controller", "simulate", c.controller);
    if (m.contains("disturbances")) {
      for (const json& dj : m.at("disturbances")) {
        const std::string where = "simulate.disturbances";
        AllowOnly(dj, where, {"kind", "value", "amplitude", "omega", "phase", "decay", "lambda",
                              "gamma", "w"});
        DisturbanceConfig d;
        d.kind = Get<std::string>(dj, "kind", where);
        Maybe(dj, "value", where, d.value);
        Maybe(dj, "amplitude", where, d.value);
        Maybe(dj, "omega", where, d.omega);
        Maybe(dj, "phase", where, d.phase);
        Maybe(dj, "decay", where, d.decay);
        Maybe(dj, "lambda", where, d.lambda);
        if (dj.contains("gamma")) d.gamma = PowerLaw(dj.at("gamma"), where + ".gamma");
        Maybe(dj, "w", where, d.custom);
        static const std::set<std::string> kinds = {"zero", "constant", "sinusoid", "worst_case",
                                                    "custom"};
        if (!kinds.count(d.kind)) throw ConfigError("unknown disturbance kind '" + d.kind + "'");
        Finite(d.value, where);
        c.disturbances.push_back(std::move(d));
      }
    }
    if (m.contains("cost")) {
      const json& cj = m.at("cost");
      AllowOnly(cj, "simulate.cost", {"E", "l", "R1", "R2", "gamma0"});
      CostConfig cc;
      cc.E = Get<std::string>(cj, "E", "simulate.cost");
      cc.l = Get<std::string>(cj, "l", "simulate.cost");
      cc.R1 = Get<std::string>(cj, "R1", "simulate.cost");
      cc.R2 = Get<std::string>(cj, "R2", "simulate.cost");
      if (cj.contains("gamma0")) cc.gamma0 = PowerLaw(cj.at("gamma0"), "simulate.cost.gamma0");
      c.cost = cc;
    }
    if (!(c.T > 0.0) || !std::isfinite(c.T)) throw ConfigError("simulate.T must be positive");
    for (const auto& x : c.x0) Finite(x, "simulate.x0");
  }
  if (c.disturbances.empty()) c.disturbances.push_back(DisturbanceConfig{});

  // Expression checks happen here so that every later stage sees a valid config.
  const int n = static_cast<int>(c.weights.size());
  try {
    BuildSystem(c);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("system: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("system: ") + e.what());
  }
  ParseIn(c.V, n, "lyapunov.V");
  if (c.has_synthesis) {
    try {
      Predicate::Parse(c.q0, n);
    } catch (const ParseError& e) {
      throw ConfigError(std::string("synthesis.q0: ") + e.what());
    }
    if (c.known_stabilizer) ParseIn(*c.known_stabilizer, n, "synthesis.known_stabilizer");
  }
  if (c.controller != "synthesized") ParseIn(c.controller, n, "simulate.controller");
  for (const auto& d : c.disturbances) {
    for (const auto& w : d.custom) ParseIn(w, n, "simulate.disturbances.w", true);
  }
  if (c.cost) {
    for (const auto* e : {&c.cost->E, &c.cost->l, &c.cost->R1, &c.cost->R2}) {
      ParseIn(*e, n, "simulate.cost");
    }
  }
  for (const auto& x : c.x0) {
    if (static_cast<int>(x.size()) != n) throw ConfigError("simulate.x0 entries need n values");
  }
  for (const auto& x : c.hji_points) {
    if (static_cast<int>(x.size()) != n) throw ConfigError("verify.hji_points entries need n values");
  }
  return c;
}

ProjectConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in '" + path + "': " + e.what());
  }
  return ParseConfig(j);
}

HomogeneousSystem BuildSystem(const ProjectConfig& c) {
  HomogeneousSystem sys = MakeSystem(c.weights, c.k, c.f, c.G1, c.G2, c.h, c.d, c.theta);
  auto no_time = [](const Expr& e) {
    if (e.UsesTime()) throw ConfigError("system expressions must not depend on t");
  };
  for (const auto& e : sys.f) no_time(e);
  for (const auto& e : sys.G1) no_time(e);
  for (const auto& row : sys.G2) {
    for (const auto& e : row) no_time(e);
  }
  for (const auto& e : sys.h) no_time(e);
  return sys;
}

LyapunovCandidate BuildLyapunov(const ProjectConfig& c) {
  return {ParseIn(c.V, static_cast<int>(c.weights.size()), "lyapunov.V"), c.v_degree, c.nu};
}

SynthesisConfig BuildSynthesisConfig(const ProjectConfig& c) {
  const int n = static_cast<int>(c.weights.size());
  SynthesisConfig s;
  s.c10 = c.c10;
  s.pi_coeff = c.pi_coeff;
  s.q0 = Predicate::Parse(c.q0, n);
  s.beta = c.beta;
  s.lambda = c.lambda;
  s.kappa = c.kappa;
  s.kappa_margin = c.kappa_margin;
  if (c.known_stabilizer) s.known_stabilizer = ParseIn(*c.known_stabilizer, n, "known_stabilizer");
  s.budget.samples = c.budget;
  s.seed = c.seed;
  return s;
}

std::optional<CostPieces> BuildCost(const ProjectConfig& c) {
  if (!c.cost) return std::nullopt;
  const int n = static_cast<int>(c.weights.size());
  auto fn = [&](const std::string& text) {
    const Expr e = ParseIn(text, n, "simulate.cost");
    return ScalarFn([e](const Vec& x) { return e.Eval(x); });
  };
  return CostPieces{fn(c.cost->E), fn(c.cost->l), fn(c.cost->R1), fn(c.cost->R2),
                    PowerKInfinity(c.cost->gamma0.first, c.cost->gamma0.second)};
}

DisturbanceSpec BuildDisturbance(const DisturbanceConfig& d, const HomogeneousSystem& sys,
                                 std::shared_ptr<const LieDerivatives> lie,
                                 const std::optional<PowerKInfinity>& default_gamma) {
  auto vec = [](const std::vector<double>& v) {
    return Vec(Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  if (d.kind == "zero") return DisturbanceSpec::Zero();
  if (d.kind == "constant") return DisturbanceSpec::Constant(vec(d.value));
  if (d.kind == "sinusoid") return DisturbanceSpec::Sinusoid(vec(d.value), d.omega, d.phase, d.decay);
  if (d.kind == "worst_case") {
    std::optional<PowerKInfinity> g = default_gamma;
    if (d.gamma) g = PowerKInfinity(d.gamma->first, d.gamma->second);
    if (!g) throw ConfigError("worst_case disturbance needs gamma when nothing is synthesized");
    return DisturbanceSpec::WorstCase(std::move(lie), *g, d.lambda);
  }
  std::vector<Expr> ch;
  for (const auto& w : d.custom) ch.push_back(ParseIn(w, sys.n, "disturbance", true));
  return DisturbanceSpec::Custom(std::move(ch));
}

void WriteFileAtomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw ConfigError("cannot rename onto '" + path + "': " + ec.message());
  }
}

}  // namespace homopt
