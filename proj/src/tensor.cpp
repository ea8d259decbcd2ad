#include "shampoo/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "shampoo/kernels.hpp"

namespace shampoo {

namespace {

std::size_t checked_size(const std::vector<std::size_t>& shape) {
  if (shape.empty())
    throw std::invalid_argument("tensor order must be at least 1");
  std::size_t n = 1;
  for (std::size_t e : shape) {
    if (e == 0) throw std::invalid_argument("tensor extents must be positive");
    n *= e;
  }
  return n;
}

void check_mode(std::size_t mode, std::size_t order) {
  if (mode >= order)
    throw std::out_of_range("mode " + std::to_string(mode) +
                            " out of range for order-" + std::to_string(order) +
                            " tensor");
}

// Extent product before / after `mode`; `inner` is also the slice stride.
void mode_extents(const std::vector<std::size_t>& shape, std::size_t mode,
                  std::size_t& outer, std::size_t& inner) {
  outer = 1;
  inner = 1;
  for (std::size_t i = 0; i < mode; ++i) outer *= shape[i];
  for (std::size_t i = mode + 1; i < shape.size(); ++i) inner *= shape[i];
}

}  // namespace

SymMatrix::SymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

SymMatrix::SymMatrix(std::size_t dim, std::vector<double> data)
    : dim_(dim), data_(std::move(data)) {
  if (data_.size() != dim * dim)
    throw std::invalid_argument("symmetric matrix data size mismatch");
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = i + 1; j < dim_; ++j) {
      const double a = data_[i * dim_ + j];
      const double b = data_[j * dim_ + i];
      const double tol = 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
      if (!(std::abs(a - b) <= tol))
        throw std::invalid_argument(
            "matrix is not symmetric at (" + std::to_string(i) + "," +
            std::to_string(j) + "): " + std::to_string(a) + " vs " +
            std::to_string(b));
      data_[j * dim_ + i] = a;
    }
  }
}

SymMatrix SymMatrix::identity(std::size_t dim, double scale) {
  SymMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m.data_[i * dim + i] = scale;
  return m;
}

void SymMatrix::add_scaled(const SymMatrix& other, double a) {
  if (other.dim_ != dim_)
    throw std::invalid_argument("symmetric matrix dimension mismatch");
  kernels::axpy(a, other.data_.data(), data_.data(), data_.size());
}

void SymMatrix::add_scaled_identity(double a) {
  for (std::size_t i = 0; i < dim_; ++i) data_[i * dim_ + i] += a;
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += data_[i * dim_ + i];
  return t;
}

double SymMatrix::frobenius_norm() const {
  return std::sqrt(kernels::sumsq(data_.data(), data_.size()));
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim_ != b.dim_)
    throw std::invalid_argument("symmetric matrix dimension mismatch");
  SymMatrix c(a.dim_);
  for (std::size_t i = 0; i < c.data_.size(); ++i)
    c.data_[i] = a.data_[i] - b.data_[i];
  return c;
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim_ != b.dim_)
    throw std::invalid_argument("symmetric matrix dimension mismatch");
  SymMatrix c(a.dim_);
  for (std::size_t i = 0; i < c.data_.size(); ++i)
    c.data_[i] = a.data_[i] + b.data_[i];
  return c;
}

SymMatrix operator*(double a, const SymMatrix& m) {
  SymMatrix c(m.dim());
  kernels::scale_copy(a, m.data(), c.data(), m.size());
  return c;
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(checked_size(shape_), 0.0) {}

DenseTensor::DenseTensor(std::vector<std::size_t> shape,
                         std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != checked_size(shape_))
    throw std::invalid_argument("tensor data size does not match shape");
}

std::size_t DenseTensor::extent(std::size_t mode) const {
  check_mode(mode, order());
  return shape_[mode];
}

std::size_t DenseTensor::flat_index(
    std::initializer_list<std::size_t> index) const {
  if (index.size() != order())
    throw std::invalid_argument("tensor index order mismatch");
  std::size_t flat = 0;
  std::size_t mode = 0;
  for (std::size_t i : index) {
    if (i >= shape_[mode])
      throw std::out_of_range("tensor index out of range on mode " +
                              std::to_string(mode));
    flat = flat * shape_[mode] + i;
    ++mode;
  }
  return flat;
}

double DenseTensor::at(std::initializer_list<std::size_t> index) const {
  return data_[flat_index(index)];
}

double& DenseTensor::at(std::initializer_list<std::size_t> index) {
  return data_[flat_index(index)];
}

void DenseTensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double DenseTensor::frobenius_norm() const {
  return std::sqrt(kernels::sumsq(data_.data(), data_.size()));
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw std::invalid_argument("matrix data size mismatch");
}

DenseMatrix DenseMatrix::identity(std::size_t n, double scale) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
  return m;
}

const std::vector<double>& vec(const DenseTensor& t) { return t.values(); }

DenseMatrix matricize(const DenseTensor& t, std::size_t mode) {
  check_mode(mode, t.order());
  const std::size_t n_i = t.shape()[mode];
  std::size_t outer = 0, inner = 0;
  mode_extents(t.shape(), mode, outer, inner);
  DenseMatrix m(n_i, outer * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t r = 0; r < n_i; ++r) {
      const double* src = t.data() + (o * n_i + r) * inner;
      std::copy(src, src + inner, m.row(r) + o * inner);
    }
  }
  return m;
}

DenseTensor mode_product(const DenseTensor& t, std::size_t mode,
                         const DenseMatrix& m) {
  check_mode(mode, t.order());
  const std::size_t n_i = t.shape()[mode];
  if (m.cols() != n_i)
    throw std::invalid_argument(
        "mode_product: matrix has " + std::to_string(m.cols()) +
        " columns but mode " + std::to_string(mode) + " has extent " +
        std::to_string(n_i));
  std::size_t outer = 0, inner = 0;
  mode_extents(t.shape(), mode, outer, inner);
  const std::size_t rows = m.rows();
  std::vector<std::size_t> shape = t.shape();
  shape[mode] = rows;
  DenseTensor out(shape);
  for (std::size_t o = 0; o < outer; ++o) {
    const double* src = t.data() + o * n_i * inner;
    double* dst = out.data() + o * rows * inner;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t s = 0; s < n_i; ++s)
        kernels::axpy(m(r, s), src + s * inner, dst + r * inner, inner);
  }
  return out;
}

DenseTensor scale_mode(const DenseTensor& t, std::size_t mode,
                       const std::vector<double>& d) {
  check_mode(mode, t.order());
  const std::size_t n_i = t.shape()[mode];
  if (d.size() != n_i)
    throw std::invalid_argument("scale_mode: diagonal length mismatch");
  std::size_t outer = 0, inner = 0;
  mode_extents(t.shape(), mode, outer, inner);
  DenseTensor out(t.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < n_i; ++j) {
      const std::size_t off = (o * n_i + j) * inner;
      kernels::scale_copy(d[j], t.data() + off, out.data() + off, inner);
    }
  }
  return out;
}

SymMatrix contract(const DenseTensor& t, std::size_t mode) {
  const DenseMatrix m = matricize(t, mode);
  SymMatrix c(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j)
      c.set(i, j, kernels::dot(m.row(i), m.row(j), m.cols()));
  return c;
}

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t p = 0; p < b.rows(); ++p) {
      double* dst = c.row(i * b.rows() + p);
      for (std::size_t j = 0; j < a.cols(); ++j)
        kernels::scale_copy(a(i, j), b.row(p), dst + j * b.cols(), b.cols());
    }
  return c;
}

SymMatrix kron(const SymMatrix& a, const SymMatrix& b) {
  // a_ij * b_pq and a_ji * b_qp are products of bit-identical doubles, so the
  // result is exactly symmetric and needs no re-validation.
  const std::size_t ad = a.dim(), bd = b.dim();
  SymMatrix c(ad * bd);
  for (std::size_t i = 0; i < ad; ++i)
    for (std::size_t p = 0; p < bd; ++p) {
      double* dst = c.data() + (i * bd + p) * ad * bd;
      for (std::size_t j = 0; j < ad; ++j)
        kernels::scale_copy(a(i, j), b.data() + p * bd, dst + j * bd, bd);
    }
  return c;
}

DenseTensor outer(const std::vector<std::vector<double>>& factors) {
  if (factors.empty())
    throw std::invalid_argument("outer product needs at least one factor");
  std::vector<std::size_t> shape;
  std::vector<double> data{1.0};
  for (const auto& u : factors) {
    if (u.empty())
      throw std::invalid_argument("outer product factors must be non-empty");
    std::vector<double> next(data.size() * u.size());
    for (std::size_t e = 0; e < data.size(); ++e)
      kernels::scale_copy(data[e], u.data(), next.data() + e * u.size(),
                          u.size());
    data.swap(next);
    shape.push_back(u.size());
  }
  return DenseTensor(std::move(shape), std::move(data));
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      kernels::axpy(a(i, k), b.row(k), c.row(i), b.cols());
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("matmul_nt: column dimension mismatch");
  DenseMatrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      c(i, j) = kernels::dot(a.row(i), b.row(j), a.cols());
  return c;
}

std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x) {
  if (x.size() != a.cols())
    throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<double> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    y[i] = kernels::dot(a.row(i), x.data(), a.cols());
  return y;
}

DenseTensor to_tensor(const DenseMatrix& m) {
  return DenseTensor({m.rows(), m.cols()}, m.values());
}

DenseMatrix to_matrix(const DenseTensor& t) {
  if (t.order() != 2)
    throw std::invalid_argument("to_matrix requires an order-2 tensor");
  return DenseMatrix(t.extent(0), t.extent(1), t.values());
}

}  // namespace shampoo
