#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "homopt/errors.h"
#include "homopt/sim.h"
#include "homopt/synthesis.h"
#include "homopt/sysdef.h"

namespace homopt {

/// Malformed or unreadable configuration; maps to the usage/IO exit code.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct DisturbanceConfig {
  std::string kind = "zero";  // zero | constant | sinusoid | worst_case | custom
  std::vector<double> value;  // constant value or sinusoid amplitude
  double omega = 0.0;
  double phase = 0.0;
  double decay = 0.0;
  double lambda = 2.0;
  std::optional<std::pair<double, double>> gamma;  // (a, p); defaults to the synthesized gamma
  std::vector<std::string> custom;
};

struct CostConfig {
  std::string E, l, R1, R2;
  std::pair<double, double> gamma0{1.0, 2.0};
};

struct ProjectConfig {
  std::string name;

  std::vector<double> weights;
  double k = 0.0;
  std::vector<std::string> f, G1, h;
  std::vector<std::vector<std::string>> G2;
  std::vector<double> d;
  std::optional<double> theta;

  std::string V;
  double v_degree = 0.0;
  double nu = 0.0;

  bool has_synthesis = false;
  double c10 = 1.0;
  std::optional<double> pi_coeff;
  std::string q0 = "true";
  double beta = 2.0;
  double lambda = 2.0;
  std::optional<double> kappa;
  double kappa_margin = 0.043;
  std::optional<std::string> known_stabilizer;

  std::uint64_t seed = 42;
  int budget = 0;
  int pd_budget = 4096;
  int dissipation_samples = 10000;
  double rel_tol = 1e-6;
  std::vector<double> gains = {0.4, 0.6, 1.0, 5.0};
  std::vector<std::vector<double>> hji_points;

  std::vector<std::vector<double>> x0;
  double T = 10.0;
  double integrator_tol = 1e-9;
  std::string controller = "synthesized";  // or an expression in x1..xn
  std::vector<DisturbanceConfig> disturbances;
  std::optional<CostConfig> cost;

  nlohmann::json raw;
};

/// Throws ConfigError on IO, JSON, schema or expression errors.
ProjectConfig LoadConfig(const std::string& path);
ProjectConfig ParseConfig(const nlohmann::json& j);

HomogeneousSystem BuildSystem(const ProjectConfig& c);
LyapunovCandidate BuildLyapunov(const ProjectConfig& c);
SynthesisConfig BuildSynthesisConfig(const ProjectConfig& c);
std::optional<CostPieces> BuildCost(const ProjectConfig& c);

/// The synthesized gamma/lie are used for worst_case when the config does
/// not pin gamma.
DisturbanceSpec BuildDisturbance(const DisturbanceConfig& d, const HomogeneousSystem& sys,
                                 std::shared_ptr<const LieDerivatives> lie,
                                 const std::optional<PowerKInfinity>& default_gamma);

/// Writes through a temporary file in the same directory and renames it.
void WriteFileAtomic(const std::string& path, const std::string& content);

}  // namespace homopt
