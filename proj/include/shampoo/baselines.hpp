#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "shampoo/optimizer.hpp"
#include "shampoo/sym_matrix.hpp"
#include "shampoo/tensor.hpp"

namespace shampoo {

// Reference optimizers. All of them are structure-oblivious: they act on the
// flattened parameter vector, so tensor shape never influences the update.
enum class BaselineKind { sgd, adagrad_diag, adam, adagrad_full };

const char* baseline_name(BaselineKind kind);
BaselineKind baseline_kind_from_name(const std::string& name);

struct BaselineConfig {
  double learning_rate = 0.1;
  // Gradient averaging weight for sgd; same ewma convention as the shampoo
  // module so comparisons isolate preconditioning.
  double momentum = 0.0;
  // Damping for both adagrad variants: w -= lr * (eps I + sum g g^T)^{-1/2} g,
  // applied elementwise in the diagonal variant.
  double epsilon = 1e-8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;  // throws std::invalid_argument
};

// adagrad_full maintains a dense n x n accumulator over the flattened
// dimension; refuse absurd sizes.
inline constexpr std::size_t kFullAdagradMaxDim = 4096;

class BaselineOptimizer : public Optimizer {
 public:
  BaselineOptimizer(BaselineKind kind, std::vector<std::size_t> shape,
                    BaselineConfig config);

  void step(const DenseTensor& grad) override;
  const DenseTensor& params() const override { return params_; }
  const char* name() const override { return baseline_name(kind_); }

  BaselineKind kind() const { return kind_; }
  const BaselineConfig& config() const { return config_; }
  std::uint64_t step_count() const { return step_count_; }

  // Warm start for tests and benchmarks; accumulators are left untouched.
  void set_params(const DenseTensor& w);

  // adagrad_full only: raw sum of g g^T over flattened gradients (no epsilon).
  const SymMatrix& gram_accumulator() const;

 private:
  void check_gradient(const DenseTensor& grad) const;

  BaselineKind kind_;
  BaselineConfig config_;
  DenseTensor params_;
  std::vector<double> first_;   // sgd averaged gradient / adam first moment
  std::vector<double> second_;  // adagrad_diag accumulator / adam second moment
  SymMatrix gram_;              // adagrad_full accumulator
  std::uint64_t step_count_ = 0;
};

std::unique_ptr<Optimizer> make_baseline(BaselineKind kind,
                                         std::vector<std::size_t> shape,
                                         BaselineConfig config);

}  // namespace shampoo
