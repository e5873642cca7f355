#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace homopt {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;  // failing sub-checks, or a summary
  double seconds = 0.0;
  double time_limit = 0.0;
  std::vector<std::pair<std::string, double>> values;
};

/// Runs acceptance criterion `id` (1..11) against the built-in fixtures. A
/// criterion passes only if every sub-check holds and it finishes within
/// its time limit.
CriterionResult RunCriterion(int id, std::uint64_t seed = 42);

/// Criteria exercised by `reproduce <example>`: ex1, ex2, ex3, ex4, props, all.
std::vector<int> CriteriaFor(const std::string& example);

/// Informational quantities printed by `reproduce` (integral tables, HJI
/// residuals, gains); none are asserted.
std::vector<std::pair<std::string, double>> Diagnostics(const std::string& example,
                                                        std::uint64_t seed = 42);

}  // namespace homopt
