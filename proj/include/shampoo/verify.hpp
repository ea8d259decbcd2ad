#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace shampoo {

// One verified property. `worst` is the extreme value of the per-trial
// metric: the largest relative error for identity checks, the smallest
// normalized slack eigenvalue for ordering checks. `pass` applies the
// entry's own comparison (error <= tolerance, or slack >= -tolerance).
struct SuiteEntry {
  std::string name;
  std::string metric;  // "max_rel_error" | "min_slack" | "min_ratio_drop"
  std::size_t trials = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<SuiteEntry> entries;
  bool all_pass() const;
};

// Kronecker/vectorization calculus: the mixed-product, transpose, fractional
// power, monotonicity, trace, and rank-one identities, the two-sided product
// identity, its order-k mode-product chain, and the matricization identities
// for rank-one tensors and mode products. Randomized at base dims <= 6;
// every entry must hold to relative error 1e-10.
VerifyReport verify_kron_suite(std::uint64_t seed, std::size_t trials);

// PSD ordering facts behind the regret analysis: the rank-scaled vectorized
// gradient bounds (single and accumulated), the accumulated-root dominance,
// the order-3 tensor analog, the matricized-transport equivalence, and the
// geometric-mean/fractional-power monotonicity probes. Matrix dims <= (3,4),
// tensor dims (2,3,2); slack eigenvalues must stay above -1e-7 (monotonicity
// probes -1e-8).
VerifyReport verify_loewner_suite(std::uint64_t seed, std::size_t trials);

// End-to-end regret-bound certification on synthetic problems: the matrix,
// order-3 tensor, and diagonal-variant bounds at their theory learning rate,
// plus the sub-linear growth probe R_t / sqrt(t) at t in {250, 500, 1000}.
VerifyReport verify_bounds_suite(std::uint64_t seed);

VerifyReport verify_all(std::uint64_t seed, std::size_t trials);

}  // namespace shampoo
