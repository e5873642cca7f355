// Acceptance criteria 1..11. Without arguments every criterion runs; with
// a number only that one does. One line per criterion, exit status 1 if
// any criterion fails.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "homopt/reproduce.h"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty()) {
    for (int i = 1; i <= 11; ++i) ids.push_back(i);
  }
  bool ok = true;
  for (int id : ids) {
    const homopt::CriterionResult r = homopt::RunCriterion(id);
    std::printf("criterion %02d %s  %s (%.3f s, limit %.0f s)%s%s\n", r.id,
                r.pass ? "PASS" : "FAIL", r.title.c_str(), r.seconds, r.time_limit,
                r.detail.empty() ? "" : ": ", r.detail.c_str());
    for (const auto& [k, v] : r.values) std::printf("    %s = %.10g\n", k.c_str(), v);
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}
