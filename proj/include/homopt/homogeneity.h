#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace homopt {

using Vec = Eigen::VectorXd;
using ScalarFn = std::function<double(const Vec&)>;
using VectorFn = std::function<Vec(const Vec&)>;
using PointPredicate = std::function<bool(const Vec&)>;

/// Weighted dilation x_i -> eps^{r_i} x_i with positive weights r_i.
class Dilation {
 public:
  explicit Dilation(std::vector<double> weights);

  int dim() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  double weight(int i) const { return weights_[i]; }
  /// r_0 = min_i r_i.
  double min_weight() const { return min_weight_; }
  double max_weight() const { return max_weight_; }

  Vec Apply(double eps, const Vec& x) const;

 private:
  std::vector<double> weights_;
  double min_weight_;
  double max_weight_;
};

Vec ApplyDilation(const Dilation& d, double eps, const Vec& x);

/// Gamma(x) = (sum_i |x_i|^{nu/r_i})^{1/nu}, homogeneous of degree one
/// with respect to the dilation. Requires nu > max r_i.
class HomogeneousNorm {
 public:
  HomogeneousNorm(Dilation dilation, double nu);

  const Dilation& dilation() const { return dilation_; }
  double nu() const { return nu_; }
  int dim() const { return dilation_.dim(); }

  double operator()(const Vec& x) const;

 private:
  Dilation dilation_;
  double nu_;
};

double HomoNorm(const HomogeneousNorm& g, const Vec& x);

/// A point of the unit homogeneous sphere {Gamma = 1}.
struct SpherePoint {
  Vec coords;
  double residual = 0.0;  // |Gamma(coords) - 1|
};

/// Maps a nonzero direction onto the sphere along its dilation orbit.
SpherePoint ProjectToSphere(const HomogeneousNorm& g, const Vec& direction);

/// Deterministic sphere sample: the projected axis points +-e_i followed by
/// projections of uniformly random Euclidean directions. For n = 1 this is
/// exactly the two sphere points.
std::vector<SpherePoint> SphereSample(const HomogeneousNorm& g, int count, std::uint64_t seed);

struct HomogeneityOptions {
  int samples = 64;
  std::vector<double> eps_grid = {0.25, 0.5, 2.0, 4.0};
  double tol = 1e-8;
  std::uint64_t seed = 42;
};

struct HomogeneityReport {
  double max_rel_error = 0.0;
  bool pass = true;
  Vec worst_point;
  double worst_eps = 1.0;
};

/// Checks f(Delta_eps x) = eps^degree f(x) on random points.
HomogeneityReport CheckHomogeneous(const ScalarFn& f, double degree, const Dilation& d,
                                   const HomogeneityOptions& options = {});

/// Checks phi_i(Delta_eps x) = eps^{degree + r_i} phi_i(x) for every
/// component of a vector field.
HomogeneityReport CheckHomogeneousField(const VectorFn& f, double degree, const Dilation& d,
                                        const HomogeneityOptions& options = {});

/// Same as CheckHomogeneousField but component i is checked against
/// eps^{degree + offsets[i]}; used for matrix-valued fields whose columns
/// are indexed by the disturbance channel.
HomogeneityReport CheckHomogeneousComponents(const VectorFn& f, const std::vector<double>& degrees,
                                             const Dilation& d,
                                             const HomogeneityOptions& options = {});

enum class OptimizeMode { kMin, kMax };

struct SphereBudget {
  int samples = 0;  // 0 selects DefaultSphereSamples(n)
  int refine_starts = 8;
  int refine_iters = 200;
  double initial_step = 0.05;  // radians
};

int DefaultSphereSamples(int n);

struct SphereOptimum {
  double value = 0.0;
  Vec argpoint;
  long n_evals = 0;
};

/// Extremum of `objective` over the sphere (optionally restricted to the
/// points satisfying `constraint`): dense sampling followed by multistart
/// Nelder-Mead polish in hyperspherical angles, re-projected every step.
/// Constraint membership is by rejection, so the argpoint always satisfies
/// it. Throws DomainError if no sample satisfies the constraint.
SphereOptimum SphereOptimize(const ScalarFn& objective, const HomogeneousNorm& g,
                             OptimizeMode mode, const SphereBudget& budget, std::uint64_t seed,
                             const PointPredicate& constraint = {});

std::string FormatPoint(const Vec& x);

}  // namespace homopt
