#pragma once

#include <vector>

#include "shampoo/tensor.hpp"

namespace shampoo {

struct EigenPair {
  std::vector<double> eigenvalues;  // descending
  DenseMatrix eigenvectors;         // orthonormal; column i pairs with eigenvalues[i]
};

// Symmetric eigendecomposition (cyclic two-sided Jacobi). Deterministic for a
// given input; reconstruction residual <= 1e-9 * ||A||_F.
EigenPair sym_eig(const SymMatrix& a);

// U diag(lambda) U^T from an EigenPair.
SymMatrix reconstruct(const EigenPair& e);

// A^alpha through the spectral map x -> x^alpha. Eigenvalues below
// tau = 1e-12 * max(lambda_max, 1) are clamped: to tau for alpha < 0 (keeps
// the result finite on rank-deficient accumulators), to 0 otherwise.
// Eigenvalues negative beyond 1e-8 * max(1, spectral radius) are rejected.
SymMatrix matrix_power(const SymMatrix& a, double alpha);

// Same spectral map applied to a diagonal held as a vector.
std::vector<double> diag_power(const std::vector<double>& d, double alpha);

// sum_i clamp(lambda_i)^alpha, consistent with matrix_power's clamping.
double trace_power(const SymMatrix& a, double alpha);
double trace_power(const std::vector<double>& d, double alpha);

// Minimum eigenvalue of a - b normalized by max(1, spectral radius of a - b).
double loewner_slack(const SymMatrix& a, const SymMatrix& b);

// a >= b in the Loewner order, up to spectrum-relative tolerance:
// lambda_min(a-b) >= -tol * max(1, max |lambda(a-b)|).
bool loewner_geq(const SymMatrix& a, const SymMatrix& b, double tol);

}  // namespace shampoo
