#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

#include "shampoo/psd.hpp"
#include "shampoo/rng.hpp"
#include "shampoo/tensor.hpp"

// Shared fixtures and brute-force reference implementations. The naive_*
// functions are written straight from the elementwise definitions, on purpose
// independent of the library's kernel-composed code paths, so they can serve
// as oracles.
namespace testutil {

using shampoo::DenseMatrix;
using shampoo::DenseTensor;
using shampoo::Rng;
using shampoo::SymMatrix;

inline bool bits_equal(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n,
                                         double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

inline DenseMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                                 double scale = 1.0) {
  return DenseMatrix(rows, cols, random_vector(rng, rows * cols, scale));
}

inline DenseTensor random_tensor(Rng& rng, std::vector<std::size_t> shape,
                                 double scale = 1.0) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return DenseTensor(std::move(shape), random_vector(rng, n, scale));
}

// R^T R + ridge I; PSD by construction, PD for ridge > 0.
inline SymMatrix random_spd(Rng& rng, std::size_t n, double ridge = 0.0) {
  const DenseMatrix r = random_matrix(rng, n, n);
  SymMatrix s(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += r(k, i) * r(k, j);
      s.set(i, j, acc);
    }
  s.add_scaled_identity(ridge);
  return s;
}

inline SymMatrix random_sym(Rng& rng, std::size_t n, double scale = 1.0) {
  SymMatrix s(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) s.set(i, j, scale * rng.normal());
  return s;
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double norm2(const std::vector<double>& a) {
  double acc = 0.0;
  for (double x : a) acc += x * x;
  return std::sqrt(acc);
}

// ||a - b|| / max(1, ||b||)
inline double rel_diff(const std::vector<double>& a,
                       const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm2(d) / std::max(1.0, norm2(b));
}

// Odometer over a multi-index, row-major (last index fastest).
inline void for_each_index(
    const std::vector<std::size_t>& shape,
    const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> idx(shape.size(), 0);
  for (;;) {
    fn(idx);
    std::size_t mode = shape.size();
    while (mode > 0) {
      --mode;
      if (++idx[mode] < shape[mode]) break;
      idx[mode] = 0;
      if (mode == 0) return;
    }
  }
}

inline std::size_t flat_of(const std::vector<std::size_t>& shape,
                           const std::vector<std::size_t>& idx) {
  std::size_t flat = 0;
  for (std::size_t m = 0; m < shape.size(); ++m) flat = flat * shape[m] + idx[m];
  return flat;
}

inline DenseMatrix naive_matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  return c;
}

inline DenseMatrix naive_transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

// Row j of the result is the row-major flattening of the j-th slice along
// `mode`; the column index enumerates the remaining modes in order.
inline DenseMatrix naive_matricize(const DenseTensor& t, std::size_t mode) {
  std::size_t cols = 1;
  for (std::size_t m = 0; m < t.order(); ++m)
    if (m != mode) cols *= t.shape()[m];
  DenseMatrix out(t.shape()[mode], cols);
  std::vector<std::size_t> rest_shape;
  for (std::size_t m = 0; m < t.order(); ++m)
    if (m != mode) rest_shape.push_back(t.shape()[m]);
  for_each_index(t.shape(), [&](const std::vector<std::size_t>& idx) {
    std::vector<std::size_t> rest;
    for (std::size_t m = 0; m < idx.size(); ++m)
      if (m != mode) rest.push_back(idx[m]);
    out(idx[mode], flat_of(rest_shape, rest)) =
        t.values()[flat_of(t.shape(), idx)];
  });
  return out;
}

// out[..., r, ...] = sum_s M(r, s) * t[..., s, ...]
inline DenseTensor naive_mode_product(const DenseTensor& t, std::size_t mode,
                                      const DenseMatrix& m) {
  std::vector<std::size_t> shape = t.shape();
  shape[mode] = m.rows();
  DenseTensor out(shape);
  for_each_index(shape, [&](const std::vector<std::size_t>& idx) {
    double acc = 0.0;
    std::vector<std::size_t> src = idx;
    for (std::size_t s = 0; s < t.shape()[mode]; ++s) {
      src[mode] = s;
      acc += m(idx[mode], s) * t.values()[flat_of(t.shape(), src)];
    }
    out[flat_of(shape, idx)] = acc;
  });
  return out;
}

inline DenseMatrix naive_kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          c(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return c;
}

// Residual ||sum_i lambda_i u_i u_i^T - a||_F computed by plain loops.
inline double naive_reconstruction_residual(const shampoo::EigenPair& e,
                                            const SymMatrix& a) {
  const std::size_t n = a.dim();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        v += e.eigenvalues[k] * e.eigenvectors(i, k) * e.eigenvectors(j, k);
      const double d = v - a(i, j);
      acc += d * d;
    }
  return std::sqrt(acc);
}

inline double naive_orthonormality_residual(const DenseMatrix& u) {
  const std::size_t n = u.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < n; ++k) v += u(k, i) * u(k, j);
      const double d = v - (i == j ? 1.0 : 0.0);
      acc += d * d;
    }
  return std::sqrt(acc);
}

}  // namespace testutil
