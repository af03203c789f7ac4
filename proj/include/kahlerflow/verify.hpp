#pragma once
#include <string>
#include <vector>

namespace kahlerflow {

// One identity/property check: pass iff measured is within threshold under
// the stated comparison (all checks are "measured <= threshold" after
// normalization, with the sign conventions folded into `measured`).
struct CheckResult {
  std::string name;
  double measured = 0;
  double threshold = 0;
  bool pass = false;
  double runtime_s = 0;
};

// The deterministic identity suite: change-of-variables exactness, the
// Fisher-pullback identity with its O(h²) rate, the curvature oracles,
// Jacobi's formula, the normalized-KRF recursion reductions, KL
// dissipation, the Perelman lab, surgery, gradient correctness and the
// zero-curvature diagnostics case. Training end-to-end checks live in the
// acceptance runner, not here.
std::vector<CheckResult> run_identity_suite();

void write_check_csv(const std::vector<CheckResult>& results, const std::string& path);

}  // namespace kahlerflow
