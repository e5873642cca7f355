#include "homopt/sim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "homopt/errors.h"

namespace homopt {

namespace odeint = boost::numeric::odeint;

Vec WorstCaseW(const LieDerivatives& lie, const PowerKInfinity& gamma, double lambda,
               const Vec& x) {
  const Vec b = lie.LG2V(x);
  const double nb = b.norm();
  if (nb == 0.0) return Vec::Zero(b.size());
  return b * (lambda * gamma.InverseDerivative(2.0 * nb) / nb);
}

double DeltaW(const LieDerivatives& lie, const PowerKInfinity& gamma, double lambda, double beta,
              const Vec& x, const Vec& w) {
  const Vec b = lie.LG2V(x);
  const PowerKInfinity ell = LfTransform(gamma);
  return beta * (2.0 * b.dot(w) - lambda * ell(2.0 * b.norm()) - lambda * gamma(w.norm() / lambda));
}

DisturbanceSpec DisturbanceSpec::Zero() { return {}; }

DisturbanceSpec DisturbanceSpec::Constant(Vec value) {
  DisturbanceSpec d;
  d.kind = Kind::kConstant;
  d.value = std::move(value);
  return d;
}

DisturbanceSpec DisturbanceSpec::Sinusoid(Vec amplitude, double omega, double phase,
                                          double decay) {
  DisturbanceSpec d;
  d.kind = Kind::kSinusoid;
  d.value = std::move(amplitude);
  d.omega = omega;
  d.phase = phase;
  d.decay = decay;
  return d;
}

DisturbanceSpec DisturbanceSpec::WorstCase(std::shared_ptr<const LieDerivatives> lie,
                                           PowerKInfinity gamma, double lambda) {
  if (!(lambda > 0.0 && lambda <= 2.0)) throw DomainError("worst-case w needs lambda in (0, 2]");
  DisturbanceSpec d;
  d.kind = Kind::kWorstCase;
  d.lie = std::move(lie);
  d.gamma = gamma;
  d.lambda = lambda;
  return d;
}

DisturbanceSpec DisturbanceSpec::Custom(std::vector<Expr> channels) {
  DisturbanceSpec d;
  d.kind = Kind::kCustom;
  d.custom = std::move(channels);
  return d;
}

Vec DisturbanceSpec::operator()(double t, const Vec& x, int xi) const {
  auto check = [&](const Vec& w) {
    if (w.size() != xi) {
      throw DomainError("disturbance has " + std::to_string(w.size()) + " channels, system has " +
                        std::to_string(xi));
    }
    return w;
  };
  switch (kind) {
    case Kind::kZero:
      return Vec::Zero(xi);
    case Kind::kConstant:
      return check(value);
    case Kind::kSinusoid:
      return check(value * (std::sin(omega * t + phase) * std::exp(-decay * t)));
    case Kind::kWorstCase:
      if (!lie) throw DomainError("worst-case disturbance without Lie derivatives");
      return check(WorstCaseW(*lie, gamma, lambda, x));
    case Kind::kCustom: {
      Vec w(custom.size());
      for (size_t i = 0; i < custom.size(); ++i) w[i] = custom[i].Eval(x, t);
      return check(w);
    }
  }
  return Vec::Zero(xi);
}

std::string DisturbanceSpec::Describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kZero:
      os << "zero";
      break;
    case Kind::kConstant:
      os << "constant " << FormatPoint(value);
      break;
    case Kind::kSinusoid:
      os << "sinusoid amplitude " << FormatPoint(value) << " omega " << omega << " phase " << phase
         << " decay " << decay;
      break;
    case Kind::kWorstCase:
      os << "worst_case lambda " << lambda << " gamma " << gamma.a() << "*s^" << gamma.p();
      break;
    case Kind::kCustom:
      os << "custom";
      for (const Expr& e : custom) os << " [" << e.ToString() << "]";
      break;
  }
  return os.str();
}

namespace {

using State = std::vector<double>;

Vec ToVec(const State& s) { return Eigen::Map<const Vec>(s.data(), static_cast<long>(s.size())); }

HomogeneousNorm ClampNorm(const HomogeneousSystem& sys) {
  return HomogeneousNorm(sys.dilation, std::max(2.0, 2.0 * sys.dilation.max_weight()));
}

}  // namespace

Trajectory Integrate(const HomogeneousSystem& sys, const ScalarFn& controller,
                     const DisturbanceSpec& dist, const Vec& x0, double T,
                     const IntegrateOptions& opt, const ScalarFn& value_fn) {
  if (!(T > 0.0)) throw DomainError("horizon T must be positive");
  if (!(opt.tol > 0.0)) throw DomainError("integrator tolerance must be positive");
  if (x0.size() != sys.n) throw DomainError("x0 has wrong dimension");
  const HomogeneousNorm norm = ClampNorm(sys);
  const int n = sys.n;

  auto rhs = [&](const State& s, State& ds, double t) {
    const Vec x = ToVec(s);
    ds.assign(n, 0.0);
    if (norm(x) < opt.origin_eps) return;
    const double u = controller(x);
    const Vec w = dist(t, x, sys.xi);
    const Vec dx = sys.F(x) + sys.G1At(x) * u + sys.G2At(x) * w;
    for (int i = 0; i < n; ++i) ds[i] = dx[i];
  };

  Trajectory tr;
  auto record = [&](double t, const Vec& x) {
    const bool origin = norm(x) < opt.origin_eps;
    const Vec xs = origin ? Vec::Zero(n) : x;
    const double u = origin ? 0.0 : controller(xs);
    const Vec w = origin ? Vec::Zero(sys.xi) : dist(t, xs, sys.xi);
    tr.times.push_back(t);
    tr.states.push_back(xs);
    tr.u.push_back(u);
    tr.w.push_back(w);
    tr.y.push_back(sys.Output(xs, u));
    tr.V_vals.push_back(value_fn ? (origin ? 0.0 : value_fn(xs)) : 0.0);
    return origin;
  };

  if (record(0.0, x0)) {
    tr.terminated_at_origin = true;
  } else {
    const double max_dt = T / opt.min_steps;
    auto stepper = odeint::make_dense_output(opt.tol * 1e-3, opt.tol, max_dt,
                                             odeint::runge_kutta_dopri5<State>());
    State s(x0.data(), x0.data() + n);
    stepper.initialize(s, 0.0, std::min(max_dt, T * 1e-4));
    State node(n);
    double t_now = 0.0;
    while (t_now < T) {
      std::pair<double, double> span;
      try {
        span = stepper.do_step(rhs);
      } catch (const std::exception& e) {
        throw DomainError(std::string("integration failed near t=") + std::to_string(t_now) +
                          " x=" + FormatPoint(tr.states.back()) + ": " + e.what());
      }
      ++tr.rk_steps;
      const double h = span.second - span.first;
      if (!(h > 1e-14 * std::max(1.0, T))) {
        throw DomainError("step size underflow at t=" + std::to_string(span.first) +
                          " x=" + FormatPoint(ToVec(stepper.current_state())));
      }
      bool clamped = false;
      for (int j = 1; j <= opt.substeps; ++j) {
        const double t = std::min(T, span.first + h * j / opt.substeps);
        if (t <= t_now) continue;
        stepper.calc_state(t, node);
        const Vec x = ToVec(node);
        if (!x.allFinite()) {
          throw DomainError("non-finite state at t=" + std::to_string(t) +
                            " after x=" + FormatPoint(tr.states.back()));
        }
        t_now = t;
        if (record(t, x)) {
          clamped = true;
          break;
        }
        if (t >= T) break;
      }
      if (clamped) {
        tr.terminated_at_origin = true;
        break;
      }
    }
  }

  if (tr.terminated_at_origin) {
    tr.origin_time = tr.times.back();
    const double dt = T / 1000.0;
    double t = tr.times.back();
    while (t < T) {
      t = std::min(T, t + dt);
      if (T - t < 1e-3 * dt) t = T;
      record(t, Vec::Zero(n));
    }
  }
  return tr;
}

namespace {

// Integral over [t0, t2] of the quadratic through three nodes.
double PairFull(double h0, double h1, double f0, double f1, double f2) {
  const double H = h0 + h1;
  return H / 6.0 * ((2.0 - h1 / h0) * f0 + H * H / (h0 * h1) * f1 + (2.0 - h0 / h1) * f2);
}

// Integral over [t0, t1] of the same quadratic.
double PairFirst(double h0, double h1, double f0, double f1, double f2) {
  const double H = h0 + h1;
  const double w0 = h0 / 2.0 - h0 * h0 / (6.0 * H);
  const double w1 = (H * h0 / 2.0 - h0 * h0 / 3.0) / h1;
  const double w2 = -h0 * h0 * h0 / (6.0 * H * h1);
  return w0 * f0 + w1 * f1 + w2 * f2;
}

}  // namespace

std::vector<double> CumulativeSimpson(const std::vector<double>& t, const std::vector<double>& f) {
  if (t.size() != f.size()) throw DomainError("quadrature: size mismatch");
  const size_t N = t.size();
  std::vector<double> out(N, 0.0);
  if (N < 2) return out;
  if (N == 2) {
    out[1] = 0.5 * (t[1] - t[0]) * (f[0] + f[1]);
    return out;
  }
  size_t i = 0;
  for (; i + 2 < N; i += 2) {
    const double h0 = t[i + 1] - t[i], h1 = t[i + 2] - t[i + 1];
    out[i + 1] = out[i] + PairFirst(h0, h1, f[i], f[i + 1], f[i + 2]);
    out[i + 2] = out[i] + PairFull(h0, h1, f[i], f[i + 1], f[i + 2]);
  }
  if (i + 1 < N) {
    // Trailing single interval: second half of the last three-node quadratic.
    const size_t a = N - 3;
    const double h0 = t[a + 1] - t[a], h1 = t[a + 2] - t[a + 1];
    out[N - 1] = out[N - 2] + PairFull(h0, h1, f[a], f[a + 1], f[a + 2]) -
                 PairFirst(h0, h1, f[a], f[a + 1], f[a + 2]);
  }
  return out;
}

double Simpson(const std::vector<double>& t, const std::vector<double>& f) {
  const auto c = CumulativeSimpson(t, f);
  return c.empty() ? 0.0 : c.back();
}

CostBreakdown EvaluateCost(const Trajectory& traj, const CostPieces& cost, double T) {
  if (traj.times.empty()) throw DomainError("empty trajectory");
  const double end = traj.times.back();
  if (T <= 0.0) T = end;
  if (T > end * (1.0 + 1e-12)) {
    throw DomainError("horizon " + std::to_string(T) + " exceeds trajectory end " +
                      std::to_string(end));
  }
  size_t N = 0;
  while (N < traj.times.size() && traj.times[N] <= T * (1.0 + 1e-12)) ++N;
  std::vector<double> t(traj.times.begin(), traj.times.begin() + N);
  std::vector<double> fl(N), fu(N), fy(N), fg(N), fy2(N), fw2(N), fE(N);
  for (size_t i = 0; i < N; ++i) {
    const Vec& x = traj.states[i];
    const bool origin = x.isZero(0.0);
    const double u = traj.u[i];
    const Vec& y = traj.y[i];
    const Vec& w = traj.w[i];
    fl[i] = origin ? 0.0 : cost.l(x);
    fu[i] = origin ? 0.0 : u * cost.R1(x) * u;
    fy[i] = y.squaredNorm() == 0.0 ? 0.0 : y.squaredNorm() * cost.R2(x);
    fg[i] = cost.gamma0(w.norm());
    fy2[i] = y.squaredNorm();
    fw2[i] = w.squaredNorm();
    fE[i] = origin ? 0.0 : cost.E(x);
  }
  const auto cl = CumulativeSimpson(t, fl), cu = CumulativeSimpson(t, fu),
             cy = CumulativeSimpson(t, fy), cg = CumulativeSimpson(t, fg);
  CostBreakdown b;
  b.horizon = t.back();
  b.terminal = fE.back();
  b.int_l = cl.back();
  b.int_uR1u = cu.back();
  b.int_yR2y = cy.back();
  b.int_gamma0 = cg.back();
  b.int_y2 = Simpson(t, fy2);
  b.int_w2 = Simpson(t, fw2);
  b.J = b.terminal + b.int_l + b.int_uR1u + b.int_yR2y - b.int_gamma0;
  b.running_J.resize(N);
  for (size_t i = 0; i < N; ++i) b.running_J[i] = fE[i] + cl[i] + cu[i] + cy[i] - cg[i];
  return b;
}

CostIdentityReport CostIdentityCheck(const SynthesizedController& s, const Vec& x0, double T,
                                     const CostIdentityOptions& opt) {
  const CostPieces cost = CostFromController(s);
  const double target = 2.0 * s.beta * (x0.isZero(0.0) ? 0.0 : s.lie->V(x0));
  CostIdentityReport rep;
  rep.tolerance = opt.rel_tol * target;
  const auto worst = DisturbanceSpec::WorstCase(s.lie, s.gamma, s.lambda);
  const ScalarFn value = [lie = s.lie](const Vec& x) { return lie->V(x); };

  auto run = [&](const std::string& label, const ScalarFn& u, const DisturbanceSpec& w, int side) {
    const Trajectory tr = Integrate(s.system, u, w, x0, T, opt.integrate, value);
    CostIdentityCase c;
    c.label = label;
    c.J = EvaluateCost(tr, cost).J;
    c.target = target;
    if (side == 0) {
      c.slack = rep.tolerance - std::abs(c.J - target);
    } else if (side < 0) {
      c.slack = target + rep.tolerance - c.J;
    } else {
      c.slack = c.J - (target - rep.tolerance);
    }
    c.pass = c.slack >= 0.0;
    rep.cases.push_back(c);
  };

  run("a: alpha*, w*", s.alpha_star, worst, 0);
  run("b: alpha*, w=0", s.alpha_star, DisturbanceSpec::Zero(), -1);
  run("b: alpha*, sinusoid", s.alpha_star,
      DisturbanceSpec::Sinusoid(Vec::Constant(s.system.xi, opt.sinusoid_amplitude),
                                opt.sinusoid_omega, 0.0, opt.sinusoid_decay),
      -1);
  for (double g : opt.gains) {
    std::ostringstream label;
    label << "c: " << g << "*alpha*, w*";
    run(label.str(), [a = s.alpha_star, g](const Vec& x) { return g * a(x); }, worst, 1);
  }
  rep.pass = std::all_of(rep.cases.begin(), rep.cases.end(),
                         [](const CostIdentityCase& c) { return c.pass; });
  return rep;
}

L2GainReport L2GainCheck(const Trajectory& traj, double kappa_L, double c0, double tol) {
  std::vector<double> y2(traj.times.size()), w2(traj.times.size());
  for (size_t i = 0; i < traj.times.size(); ++i) {
    y2[i] = traj.y[i].squaredNorm();
    w2[i] = traj.w[i].squaredNorm();
  }
  L2GainReport r;
  r.y_norm = std::sqrt(std::max(0.0, Simpson(traj.times, y2)));
  r.w_norm = std::sqrt(std::max(0.0, Simpson(traj.times, w2)));
  r.kappa_L = kappa_L;
  r.c0 = c0;
  r.bound = kappa_L * r.w_norm + c0;
  r.pass = r.y_norm <= r.bound + tol;
  return r;
}

std::string TrajectoryCsv(const Trajectory& traj, const std::vector<double>& running_J) {
  std::string out = "t";
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
  const int xi = traj.w.empty() ? 0 : static_cast<int>(traj.w[0].size());
  const int l = traj.y.empty() ? 0 : static_cast<int>(traj.y[0].size());
  for (int i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  out += ",u";
  for (int i = 1; i <= xi; ++i) out += ",w" + std::to_string(i);
  for (int i = 1; i <= l; ++i) out += ",y" + std::to_string(i);
  out += ",V,running_J\n";
  char buf[64];
  auto put = [&](double v, bool first = false) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!first) out += ',';
    out += buf;
  };
  for (size_t k = 0; k < traj.times.size(); ++k) {
    put(traj.times[k], true);
    for (int i = 0; i < n; ++i) put(traj.states[k][i]);
    put(traj.u[k]);
    for (int i = 0; i < xi; ++i) put(traj.w[k][i]);
    for (int i = 0; i < l; ++i) put(traj.y[k][i]);
    put(traj.V_vals[k]);
    put(k < running_J.size() ? running_J[k] : std::nan(""));
    out += '\n';
  }
  return out;
}

}  // namespace homopt
