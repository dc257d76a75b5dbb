#pragma once

// Analytic oracle suite run by `wavemap analytic-check` and the acceptance
// binary: closed-form residuals, stencil exactness and static energies.

#include <string>
#include <vector>

namespace wavemap {

struct CheckResult {
  std::string name;
  double value = 0.0;      // measured quantity
  double threshold = 0.0;  // pass bound (meaning per check, see detail)
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> analytic_checks();

}  // namespace wavemap
