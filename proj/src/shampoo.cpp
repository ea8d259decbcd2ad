#include "shampoo/shampoo.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "shampoo/kernels.hpp"
#include "shampoo/psd.hpp"

namespace shampoo {

void ShampooConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("shampoo config: learning_rate must be > 0");
  if (!(epsilon >= 0.0))
    throw std::invalid_argument("shampoo config: epsilon must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("shampoo config: momentum must be in [0, 1)");
  if (root_update_interval < 1)
    throw std::invalid_argument(
        "shampoo config: root_update_interval must be >= 1");
  if (diag_threshold < 1)
    throw std::invalid_argument("shampoo config: diag_threshold must be >= 1");
}

double root_exponent(std::size_t order) {
  if (order < 1)
    throw std::invalid_argument("root_exponent: order must be >= 1");
  return -1.0 / (2.0 * static_cast<double>(order));
}

ShampooOptimizer::ShampooOptimizer(std::vector<std::size_t> shape,
                                   ShampooConfig config)
    : config_(std::move(config)),
      params_(shape),
      momentum_(shape) {
  config_.validate();
  const std::size_t k = params_.order();
  for (const auto& [mode, variant] : config_.mode_overrides) {
    (void)variant;
    if (mode >= k)
      throw std::invalid_argument(
          "shampoo config: mode_overrides refers to mode " +
          std::to_string(mode) + " of an order-" + std::to_string(k) +
          " tensor");
  }
  modes_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t n = params_.extent(i);
    ModeState& m = modes_[i];
    auto ov = config_.mode_overrides.find(i);
    if (ov != config_.mode_overrides.end())
      m.variant = ov->second;
    else
      m.variant = n > config_.diag_threshold ? ModeVariant::diagonal
                                             : ModeVariant::full;
    if (m.variant == ModeVariant::full)
      m.stat = SymMatrix::identity(n, config_.epsilon);
    else
      m.diag_stat.assign(n, config_.epsilon);
  }
  recompute_roots();
}

ModeVariant ShampooOptimizer::mode_variant(std::size_t mode) const {
  if (mode >= modes_.size())
    throw std::out_of_range("mode " + std::to_string(mode) + " out of range");
  return modes_[mode].variant;
}

const SymMatrix& ShampooOptimizer::mode_stat(std::size_t mode) const {
  if (mode_variant(mode) != ModeVariant::full)
    throw std::invalid_argument("mode " + std::to_string(mode) +
                                " uses the diagonal representation");
  return modes_[mode].stat;
}

const std::vector<double>& ShampooOptimizer::mode_stat_diag(
    std::size_t mode) const {
  if (mode_variant(mode) != ModeVariant::diagonal)
    throw std::invalid_argument("mode " + std::to_string(mode) +
                                " uses the full representation");
  return modes_[mode].diag_stat;
}

const SymMatrix& ShampooOptimizer::mode_root(std::size_t mode) const {
  if (mode_variant(mode) != ModeVariant::full)
    throw std::invalid_argument("mode " + std::to_string(mode) +
                                " uses the diagonal representation");
  return modes_[mode].root;
}

const std::vector<double>& ShampooOptimizer::mode_root_diag(
    std::size_t mode) const {
  if (mode_variant(mode) != ModeVariant::diagonal)
    throw std::invalid_argument("mode " + std::to_string(mode) +
                                " uses the full representation");
  return modes_[mode].diag_root;
}

void ShampooOptimizer::check_gradient(const DenseTensor& grad) const {
  if (grad.shape() != params_.shape())
    throw std::invalid_argument("gradient shape does not match parameters");
  for (double v : grad.values())
    if (!std::isfinite(v))
      throw std::invalid_argument("gradient contains a non-finite entry");
}

void ShampooOptimizer::recompute_roots() {
  const double alpha = root_exponent(params_.order());
  for (ModeState& m : modes_) {
    if (m.variant == ModeVariant::full)
      m.root = matrix_power(m.stat, alpha);
    else
      m.diag_root = diag_power(m.diag_stat, alpha);
  }
}

void ShampooOptimizer::step(const DenseTensor& grad) { step_detailed(grad); }

StepReport ShampooOptimizer::step_detailed(const DenseTensor& grad) {
  check_gradient(grad);
  ++step_count_;

  // With momentum == 0 the ewma collapses to a plain copy, bit-exactly.
  kernels::ewma(config_.momentum, grad.data(), momentum_.data(),
                momentum_.size());

  const DenseTensor& stat_src =
      config_.momentum_into_preconditioner ? momentum_ : grad;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    ModeState& m = modes_[i];
    if (m.variant == ModeVariant::full) {
      m.stat.add_scaled(contract(stat_src, i), 1.0);
    } else {
      // Diagonal of the mode-i Gram matrix: per-slice sums of squares.
      const std::size_t n_i = params_.extent(i);
      std::size_t outer = 1, inner = 1;
      for (std::size_t j = 0; j < i; ++j) outer *= params_.extent(j);
      for (std::size_t j = i + 1; j < params_.order(); ++j)
        inner *= params_.extent(j);
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t j = 0; j < n_i; ++j)
          m.diag_stat[j] += kernels::sumsq(
              stat_src.data() + (o * n_i + j) * inner, inner);
    }
  }

  const bool recompute =
      step_count_ == 1 || step_count_ % config_.root_update_interval == 0;
  if (recompute) {
    recompute_roots();
    last_root_step_ = step_count_;
  }

  DenseTensor preconditioned = momentum_;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const ModeState& m = modes_[i];
    if (m.variant == ModeVariant::full) {
      const DenseMatrix root(m.root.dim(), m.root.dim(), m.root.values());
      preconditioned = mode_product(preconditioned, i, root);
    } else {
      preconditioned = scale_mode(preconditioned, i, m.diag_root);
    }
  }
  kernels::axpy(-config_.learning_rate, preconditioned.data(), params_.data(),
                params_.size());

  StepReport report;
  report.preconditioned_grad_norm = preconditioned.frobenius_norm();
  report.roots_recomputed = recompute;
  report.mode_variants.reserve(modes_.size());
  for (const ModeState& m : modes_) report.mode_variants.push_back(m.variant);
  return report;
}

StepReport ShampooOptimizer::step_diagonal(const DenseTensor& grad) {
  for (std::size_t i = 0; i < modes_.size(); ++i)
    if (modes_[i].variant != ModeVariant::diagonal)
      throw std::invalid_argument(
          "step_diagonal requires every mode to use the diagonal "
          "representation; mode " +
          std::to_string(i) + " is full");
  return step_detailed(grad);
}

}  // namespace shampoo
