#pragma once

#include "shampoo/tensor.hpp"

namespace shampoo {

// Minimal surface shared by Shampoo and the baselines so the harness can
// drive any of them through one loop.
class Optimizer {
 public:
  virtual ~Optimizer() = default;

  // Applies one online step for gradient `grad`. Throws std::invalid_argument
  // on shape mismatch or non-finite entries, leaving the state unchanged.
  virtual void step(const DenseTensor& grad) = 0;

  virtual const DenseTensor& params() const = 0;
  virtual const char* name() const = 0;
};

}  // namespace shampoo
