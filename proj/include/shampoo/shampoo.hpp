#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "shampoo/optimizer.hpp"
#include "shampoo/sym_matrix.hpp"
#include "shampoo/tensor.hpp"

namespace shampoo {

// Representation of one mode's second-moment statistic: a full n_i x n_i
// matrix or just its diagonal (O(n_i) memory).
enum class ModeVariant : std::uint8_t { full = 0, diagonal = 1 };

struct ShampooConfig {
  double learning_rate = 1.0;
  double epsilon = 1e-4;
  // Gradient averaging weight; 0 disables momentum and recovers the plain
  // update. 0.9 is the usual heuristic setting.
  double momentum = 0.0;
  // Inverse-root recomputation cadence; roots are refreshed when
  // step % interval == 0, plus always on the very first step.
  std::size_t root_update_interval = 20;
  // Modes with extent above this use the diagonal representation.
  std::size_t diag_threshold = 1200;
  std::map<std::size_t, ModeVariant> mode_overrides;
  // When true, the averaged gradient (not the raw one) feeds the
  // preconditioner statistics. Default keeps statistics raw.
  bool momentum_into_preconditioner = false;

  void validate() const;  // throws std::invalid_argument
};

struct StepReport {
  double preconditioned_grad_norm = 0.0;
  bool roots_recomputed = false;
  std::vector<ModeVariant> mode_variants;
};

// Per-mode inverse-root exponent -1/(2k) for an order-k tensor.
double root_exponent(std::size_t order);

class ShampooOptimizer : public Optimizer {
 public:
  ShampooOptimizer(std::vector<std::size_t> shape, ShampooConfig config);

  void step(const DenseTensor& grad) override;
  StepReport step_detailed(const DenseTensor& grad);
  // All-diagonal entry point; requires every mode to use the diagonal
  // representation (the O(sum n_i) memory variant).
  StepReport step_diagonal(const DenseTensor& grad);

  const DenseTensor& params() const override { return params_; }
  const char* name() const override { return "shampoo"; }

  const ShampooConfig& config() const { return config_; }
  const std::vector<std::size_t>& shape() const { return params_.shape(); }
  std::size_t order() const { return params_.order(); }
  std::uint64_t step_count() const { return step_count_; }
  std::uint64_t last_root_step() const { return last_root_step_; }
  const DenseTensor& momentum_buffer() const { return momentum_; }

  ModeVariant mode_variant(std::size_t mode) const;
  const SymMatrix& mode_stat(std::size_t mode) const;
  const std::vector<double>& mode_stat_diag(std::size_t mode) const;
  const SymMatrix& mode_root(std::size_t mode) const;
  const std::vector<double>& mode_root_diag(std::size_t mode) const;

  // Versioned little-endian binary checkpoint; see README for the layout.
  std::vector<std::uint8_t> serialize() const;
  static ShampooOptimizer deserialize(const std::vector<std::uint8_t>& bytes);

 private:
  struct ModeState {
    ModeVariant variant = ModeVariant::full;
    SymMatrix stat;
    SymMatrix root;
    std::vector<double> diag_stat;
    std::vector<double> diag_root;
  };

  ShampooOptimizer() = default;  // used by deserialize

  void check_gradient(const DenseTensor& grad) const;
  void recompute_roots();

  ShampooConfig config_;
  DenseTensor params_;
  DenseTensor momentum_;
  std::vector<ModeState> modes_;
  std::uint64_t step_count_ = 0;
  std::uint64_t last_root_step_ = 0;
};

}  // namespace shampoo
