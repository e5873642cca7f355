#include "homopt/homogeneity.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "homopt/errors.h"

namespace homopt {

Dilation::Dilation(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw DomainError("dilation needs at least one weight");
  for (double r : weights_) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("dilation weights must be positive");
  }
  min_weight_ = *std::min_element(weights_.begin(), weights_.end());
  max_weight_ = *std::max_element(weights_.begin(), weights_.end());
}

Vec Dilation::Apply(double eps, const Vec& x) const {
  if (!(eps > 0.0)) throw DomainError("dilation parameter must be positive");
  if (x.size() != dim()) throw DomainError("dimension mismatch in dilation");
  Vec out(x.size());
  for (int i = 0; i < dim(); ++i) out[i] = std::pow(eps, weights_[i]) * x[i];
  return out;
}

Vec ApplyDilation(const Dilation& d, double eps, const Vec& x) { return d.Apply(eps, x); }

HomogeneousNorm::HomogeneousNorm(Dilation dilation, double nu)
    : dilation_(std::move(dilation)), nu_(nu) {
  if (!(nu_ > dilation_.max_weight())) throw DomainError("homogeneous norm needs nu > max r_i");
}

double HomogeneousNorm::operator()(const Vec& x) const {
  if (x.size() != dim()) throw DomainError("dimension mismatch in homogeneous norm");
  double sum = 0.0;
  for (int i = 0; i < dim(); ++i) {
    if (x[i] != 0.0) sum += std::pow(std::abs(x[i]), nu_ / dilation_.weight(i));
  }
  return sum == 0.0 ? 0.0 : std::pow(sum, 1.0 / nu_);
}

double HomoNorm(const HomogeneousNorm& g, const Vec& x) { return g(x); }

SpherePoint ProjectToSphere(const HomogeneousNorm& g, const Vec& direction) {
  if (direction.size() != g.dim()) throw DomainError("dimension mismatch in projection");
  double gamma = g(direction);
  if (!(gamma > 0.0)) throw DomainError("cannot project the zero vector onto the sphere");
  Vec x = g.dilation().Apply(1.0 / gamma, direction);
  // One or two corrective passes absorb rounding in pow.
  for (int pass = 0; pass < 3; ++pass) {
    gamma = g(x);
    if (std::abs(gamma - 1.0) <= 1e-15) break;
    x = g.dilation().Apply(1.0 / gamma, x);
  }
  return {x, std::abs(g(x) - 1.0)};
}

namespace {

Vec RandomDirection(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec u(n);
  do {
    for (int i = 0; i < n; ++i) u[i] = normal(rng);
  } while (u.norm() < 1e-12);
  return u / u.norm();
}

// Hyperspherical angles <-> unit vectors.
Vec AnglesToDirection(const Vec& angles) {
  const int n = static_cast<int>(angles.size()) + 1;
  Vec u(n);
  double s = 1.0;
  for (int k = 0; k < n - 1; ++k) {
    u[k] = s * std::cos(angles[k]);
    s *= std::sin(angles[k]);
  }
  u[n - 1] = s;
  return u;
}

Vec DirectionToAngles(const Vec& u) {
  const int n = static_cast<int>(u.size());
  Vec angles(n - 1);
  for (int k = 0; k < n - 1; ++k) {
    if (k == n - 2) {
      angles[k] = std::atan2(u[n - 1], u[n - 2]);
    } else {
      angles[k] = std::atan2(u.tail(n - k - 1).norm(), u[k]);
    }
  }
  return angles;
}

// Inverts the projection: the Euclidean direction whose projection is x.
Vec DirectionOf(const Vec& x) { return x / x.norm(); }

}  // namespace

std::vector<SpherePoint> SphereSample(const HomogeneousNorm& g, int count, std::uint64_t seed) {
  const int n = g.dim();
  std::vector<SpherePoint> out;
  if (n == 1) {
    out.push_back(ProjectToSphere(g, Vec::Constant(1, 1.0)));
    out.push_back(ProjectToSphere(g, Vec::Constant(1, -1.0)));
    return out;
  }
  out.reserve(std::max(count, 2 * n));
  for (int i = 0; i < n; ++i) {
    for (double s : {1.0, -1.0}) {
      Vec e = Vec::Zero(n);
      e[i] = s;
      out.push_back(ProjectToSphere(g, e));
    }
  }
  std::mt19937_64 rng(seed);
  while (static_cast<int>(out.size()) < count) {
    out.push_back(ProjectToSphere(g, RandomDirection(n, rng)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Homogeneity checks

namespace {

std::vector<Vec> HomogeneitySamples(const Dilation& d, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_scale(std::log(0.5), std::log(2.0));
  std::vector<Vec> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vec u = RandomDirection(d.dim(), rng);
    pts.push_back(d.Apply(std::exp(log_scale(rng)), u));
  }
  return pts;
}

template <typename Eval>
Vec EvalOrThrow(const Eval& eval, const Vec& x) {
  try {
    return eval(x);
  } catch (const EvalError& e) {
    throw EvalError(std::string(e.what()) + " at x = " + FormatPoint(x));
  }
}

// `eval` returns a vector of components; component j is checked with
// degree `degrees[j]`.
template <typename Eval>
HomogeneityReport CheckComponents(const Eval& eval, const std::vector<double>& degrees,
                                  const Dilation& d, const HomogeneityOptions& options) {
  const std::vector<Vec> pts = HomogeneitySamples(d, options.samples, options.seed);
  std::vector<Vec> base;
  base.reserve(pts.size());
  const int m = static_cast<int>(degrees.size());
  Vec scale = Vec::Zero(m);
  for (const Vec& x : pts) {
    Vec v = EvalOrThrow(eval, x);
    if (v.size() != m) throw DomainError("component count does not match degree list");
    scale = scale.cwiseMax(v.cwiseAbs());
    base.push_back(std::move(v));
  }
  HomogeneityReport report;
  report.worst_point = pts.empty() ? Vec() : pts.front();
  for (std::size_t s = 0; s < pts.size(); ++s) {
    for (double eps : options.eps_grid) {
      const Vec scaled = EvalOrThrow(eval, d.Apply(eps, pts[s]));
      for (int j = 0; j < m; ++j) {
        const double factor = std::pow(eps, degrees[j]);
        const double expected = factor * base[s][j];
        const double got = scaled[j];
        if (!std::isfinite(got) || !std::isfinite(expected)) {
          if (got == expected) continue;
          report.max_rel_error = std::numeric_limits<double>::infinity();
          report.worst_point = pts[s];
          report.worst_eps = eps;
          continue;
        }
        const double floor = std::max(1e-12 * factor * scale[j], 1e-300);
        const double denom = std::max({std::abs(expected), std::abs(got), floor});
        const double err = std::abs(got - expected) / denom;
        if (err > report.max_rel_error) {
          report.max_rel_error = err;
          report.worst_point = pts[s];
          report.worst_eps = eps;
        }
      }
    }
  }
  report.pass = report.max_rel_error <= options.tol;
  return report;
}

}  // namespace

HomogeneityReport CheckHomogeneous(const ScalarFn& f, double degree, const Dilation& d,
                                   const HomogeneityOptions& options) {
  auto eval = [&](const Vec& x) { return Vec::Constant(1, f(x)); };
  return CheckComponents(eval, {degree}, d, options);
}

HomogeneityReport CheckHomogeneousField(const VectorFn& f, double degree, const Dilation& d,
                                        const HomogeneityOptions& options) {
  std::vector<double> degrees(d.dim());
  for (int i = 0; i < d.dim(); ++i) degrees[i] = degree + d.weight(i);
  return CheckComponents(f, degrees, d, options);
}

HomogeneityReport CheckHomogeneousComponents(const VectorFn& f, const std::vector<double>& degrees,
                                             const Dilation& d, const HomogeneityOptions& options) {
  return CheckComponents(f, degrees, d, options);
}

// ---------------------------------------------------------------------------
// Sphere optimization

int DefaultSphereSamples(int n) { return n <= 3 ? 4096 : 65536; }

namespace {

// Minimizes `f` from `start` with a standard Nelder-Mead simplex.
struct NelderMeadResult {
  Vec x;
  double value;
};

NelderMeadResult NelderMead(const std::function<double(const Vec&)>& f, const Vec& start,
                            double step, int iterations) {
  const int dim = static_cast<int>(start.size());
  std::vector<Vec> simplex(dim + 1, start);
  std::vector<double> values(dim + 1);
  for (int i = 0; i < dim; ++i) simplex[i + 1][i] += step;
  for (int i = 0; i <= dim; ++i) values[i] = f(simplex[i]);

  std::vector<int> order(dim + 1);
  for (int it = 0; it < iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second = order[dim - 1 >= 0 ? dim - 1 : 0];
    Vec centroid = Vec::Zero(dim);
    for (int i = 0; i <= dim; ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= dim;

    const Vec reflected = centroid + (centroid - simplex[worst]);
    const double fr = f(reflected);
    if (fr < values[best]) {
      const Vec expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Vec contracted = outside ? Vec(centroid + 0.5 * (reflected - centroid))
                                   : Vec(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = f(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (int i = 0; i <= dim; ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = f(simplex[i]);
    }
  }
  const int best =
      static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
  return {simplex[best], values[best]};
}

}  // namespace

SphereOptimum SphereOptimize(const ScalarFn& objective, const HomogeneousNorm& g,
                             OptimizeMode mode, const SphereBudget& budget, std::uint64_t seed,
                             const PointPredicate& constraint) {
  const int n = g.dim();
  const int samples = budget.samples > 0 ? budget.samples : DefaultSphereSamples(n);
  const double sign = mode == OptimizeMode::kMin ? 1.0 : -1.0;
  long evals = 0;

  struct Candidate {
    double score;  // sign * objective, smaller is better
    Vec x;
  };
  std::vector<Candidate> feasible;
  for (SpherePoint& p : SphereSample(g, samples, seed)) {
    if (constraint && !constraint(p.coords)) continue;
    ++evals;
    feasible.push_back({sign * objective(p.coords), std::move(p.coords)});
  }
  if (feasible.empty()) {
    throw DomainError("constraint subset of the sphere is empty at the sampling budget");
  }
  std::stable_sort(feasible.begin(), feasible.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score < b.score; });
  Candidate best = feasible.front();

  if (n >= 2 && budget.refine_iters > 0) {
    auto score_at = [&](const Vec& angles) {
      const SpherePoint p = ProjectToSphere(g, AnglesToDirection(angles));
      if (constraint && !constraint(p.coords)) return std::numeric_limits<double>::infinity();
      ++evals;
      const double v = sign * objective(p.coords);
      if (v < best.score) best = {v, p.coords};
      return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    const int starts = std::min<int>(budget.refine_starts, static_cast<int>(feasible.size()));
    for (int s = 0; s < starts; ++s) {
      NelderMead(score_at, DirectionToAngles(DirectionOf(feasible[s].x)), budget.initial_step,
                 budget.refine_iters);
    }
  }
  return {sign * best.score, best.x, evals};
}

std::string FormatPoint(const Vec& x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

}  // namespace homopt
