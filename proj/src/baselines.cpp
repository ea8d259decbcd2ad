#include "shampoo/baselines.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "shampoo/kernels.hpp"
#include "shampoo/psd.hpp"

namespace shampoo {

const char* baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::sgd:
      return "sgd";
    case BaselineKind::adagrad_diag:
      return "adagrad_diag";
    case BaselineKind::adam:
      return "adam";
    case BaselineKind::adagrad_full:
      return "adagrad_full";
  }
  throw std::invalid_argument("unknown baseline kind");
}

BaselineKind baseline_kind_from_name(const std::string& name) {
  if (name == "sgd") return BaselineKind::sgd;
  if (name == "adagrad_diag") return BaselineKind::adagrad_diag;
  if (name == "adam") return BaselineKind::adam;
  if (name == "adagrad_full") return BaselineKind::adagrad_full;
  throw std::invalid_argument("unknown baseline optimizer: " + name);
}

void BaselineConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("baseline config: learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("baseline config: momentum must be in [0, 1)");
  if (!(epsilon >= 0.0))
    throw std::invalid_argument("baseline config: epsilon must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0))
    throw std::invalid_argument("baseline config: beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("baseline config: beta2 must be in [0, 1)");
  if (!(adam_epsilon > 0.0))
    throw std::invalid_argument("baseline config: adam_epsilon must be > 0");
}

BaselineOptimizer::BaselineOptimizer(BaselineKind kind,
                                     std::vector<std::size_t> shape,
                                     BaselineConfig config)
    : kind_(kind), config_(std::move(config)), params_(std::move(shape)) {
  config_.validate();
  const std::size_t n = params_.size();
  switch (kind_) {
    case BaselineKind::sgd:
      first_.assign(n, 0.0);
      break;
    case BaselineKind::adagrad_diag:
      second_.assign(n, 0.0);
      break;
    case BaselineKind::adam:
      first_.assign(n, 0.0);
      second_.assign(n, 0.0);
      break;
    case BaselineKind::adagrad_full:
      if (n > kFullAdagradMaxDim)
        throw std::invalid_argument(
            "adagrad_full: flattened dimension " + std::to_string(n) +
            " exceeds the size guard of " + std::to_string(kFullAdagradMaxDim));
      gram_ = SymMatrix(n);
      break;
  }
}

void BaselineOptimizer::set_params(const DenseTensor& w) {
  if (w.shape() != params_.shape())
    throw std::invalid_argument("set_params: shape mismatch");
  params_ = w;
}

const SymMatrix& BaselineOptimizer::gram_accumulator() const {
  if (kind_ != BaselineKind::adagrad_full)
    throw std::invalid_argument(
        "gram_accumulator is only maintained by adagrad_full");
  return gram_;
}

void BaselineOptimizer::check_gradient(const DenseTensor& grad) const {
  if (grad.shape() != params_.shape())
    throw std::invalid_argument("gradient shape does not match parameters");
  for (double v : grad.values())
    if (!std::isfinite(v))
      throw std::invalid_argument("gradient contains a non-finite entry");
}

void BaselineOptimizer::step(const DenseTensor& grad) {
  check_gradient(grad);
  ++step_count_;
  const std::size_t n = params_.size();
  const double* g = grad.data();
  double* w = params_.data();

  switch (kind_) {
    case BaselineKind::sgd: {
      kernels::ewma(config_.momentum, g, first_.data(), n);
      kernels::axpy(-config_.learning_rate, first_.data(), w, n);
      break;
    }
    case BaselineKind::adagrad_diag: {
      for (std::size_t i = 0; i < n; ++i) {
        second_[i] += g[i] * g[i];
        w[i] -= config_.learning_rate * g[i] /
                std::sqrt(config_.epsilon + second_[i]);
      }
      break;
    }
    case BaselineKind::adam: {
      const double t = static_cast<double>(step_count_);
      const double c1 = 1.0 - std::pow(config_.beta1, t);
      const double c2 = 1.0 - std::pow(config_.beta2, t);
      for (std::size_t i = 0; i < n; ++i) {
        first_[i] = config_.beta1 * first_[i] + (1.0 - config_.beta1) * g[i];
        second_[i] =
            config_.beta2 * second_[i] + (1.0 - config_.beta2) * g[i] * g[i];
        const double mhat = first_[i] / c1;
        const double vhat = second_[i] / c2;
        w[i] -= config_.learning_rate * mhat /
                (std::sqrt(vhat) + config_.adam_epsilon);
      }
      break;
    }
    case BaselineKind::adagrad_full: {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
          gram_.set(i, j, gram_(i, j) + g[i] * g[j]);
      SymMatrix damped = gram_;
      damped.add_scaled_identity(config_.epsilon);
      const SymMatrix root = matrix_power(damped, -0.5);
      for (std::size_t i = 0; i < n; ++i)
        w[i] -= config_.learning_rate * kernels::dot(root.data() + i * n, g, n);
      break;
    }
  }
}

std::unique_ptr<Optimizer> make_baseline(BaselineKind kind,
                                         std::vector<std::size_t> shape,
                                         BaselineConfig config) {
  return std::make_unique<BaselineOptimizer>(kind, std::move(shape),
                                             std::move(config));
}

}  // namespace shampoo
