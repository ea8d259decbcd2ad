#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shampoo/baselines.hpp"
#include "shampoo/problems.hpp"
#include "shampoo/shampoo.hpp"

namespace shampoo {

// Which optimizer an experiment drives; exactly one of the two hyperparameter
// blocks applies, selected by name ("shampoo" or a baseline name).
struct OptimizerSpec {
  std::string name = "shampoo";
  ShampooConfig shampoo;
  BaselineConfig baseline;
};

struct ExperimentConfig {
  ProblemSpec problem;
  OptimizerSpec optimizer;
  std::uint64_t seed = 0;
  // Verification toggles. They require the shampoo optimizer and pin
  // root_update_interval = 1 and momentum = 0 for the checked trajectory;
  // the regret theorems assume exact roots every step and no averaging.
  bool bound_check = false;
  bool dominance_check = false;
  bool equivalence_check = false;
  // When false, wall_ns is recorded as 0 and output is bit-reproducible.
  bool record_walltime = true;

  void validate() const;  // throws std::invalid_argument

  // Strict JSON codec: unknown keys anywhere are errors; omitted optional
  // keys take the defaults above. See README for the schema.
  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

struct RunRecord {
  std::uint64_t step = 0;
  double loss = 0.0;
  double cum_loss = 0.0;
  double regret = 0.0;
  double bound = 0.0;
  std::uint64_t wall_ns = 0;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct BoundReport {
  std::string theorem_id;  // thm-3.1 | thm-4.1 | thm-A.1
  double regret = 0.0;
  double bound = 0.0;
  double slack = 0.0;    // bound - regret
  double r_used = 0.0;
  double d_used = 0.0;   // Frobenius D, or the entrywise bound for thm-A.1
  double eta_used = 0.0;
  std::vector<double> trace_terms;  // per-mode trace of the 1/(2k) power
  std::size_t passes = 0;           // eta-calibration passes actually run
  bool pass = false;     // slack >= -1e-6 * max(1, bound)
};

// Outcome of a per-step Loewner/trajectory side check.
struct CheckReport {
  double worst = 0.0;      // min slack (dominance) or max deviation (equiv.)
  double tolerance = 0.0;
  bool pass = false;
};

struct RunResult {
  std::vector<RunRecord> records;
  std::optional<BoundReport> bound_report;
  std::optional<CheckReport> dominance;
  std::optional<CheckReport> equivalence;
  Comparator comparator;
  std::string optimizer_name;
  std::string abort_reason;  // empty for a completed run
};

RunResult run(const ExperimentConfig& config);

// RHS of the regret bound with the optimizer's current statistics:
// sqrt(2 r) * d * prod_i trace((eps I + sum_s contraction_i)^(1/(2k))).
// Works for the all-full and all-diagonal representations.
double theorem_bound(const ShampooOptimizer& opt, double d, double r);

// Recomputes R_t = sum_{s<=t} f_s(W_s) - sum_{s<=t} f_s(W*) from scratch;
// the comparator must have been solved on this problem (fingerprint match).
std::vector<double> regret_curve(const std::vector<RunRecord>& records,
                                 const Comparator& comparator,
                                 const OnlineProblem& problem);

std::string records_to_csv(const std::vector<RunRecord>& records);
std::string records_to_json(const std::vector<RunRecord>& records,
                            const ExperimentConfig& config);
std::vector<RunRecord> parse_records_json(const std::string& text);

// Atomic file emission (write temp, rename); I/O failures name the path.
void emit_csv(const std::vector<RunRecord>& records, const std::string& path);
void emit_json(const std::vector<RunRecord>& records,
               const ExperimentConfig& config, const std::string& path);

}  // namespace shampoo
