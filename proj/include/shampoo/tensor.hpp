#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "shampoo/sym_matrix.hpp"

namespace shampoo {

// Dense tensor of arbitrary order >= 1, row-major (last mode fastest).
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::size_t> shape);
  DenseTensor(std::vector<std::size_t> shape, std::vector<double> data);

  std::size_t order() const { return shape_.size(); }
  std::size_t extent(std::size_t mode) const;
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  double at(std::initializer_list<std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);

  void fill(double v);
  double frobenius_norm() const;

 private:
  std::size_t flat_index(std::initializer_list<std::size_t> index) const;

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// Dense row-major matrix (general, not necessarily square or symmetric).
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n, double scale = 1.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Row-major flattening; the identity on the underlying storage, so this is a
// view, not a copy.
const std::vector<double>& vec(const DenseTensor& t);

// Mode-i matricization: row j is the flattening of the j-th slice along
// `mode`, giving an extent(mode) x (size/extent(mode)) matrix.
DenseMatrix matricize(const DenseTensor& t, std::size_t mode);

// Tensor-matrix product along `mode`; m.cols() must equal extent(mode), the
// result has extent m.rows() on that mode. Satisfies
// matricize(mode_product(t, i, m), i) == matmul(m, matricize(t, i)).
DenseTensor mode_product(const DenseTensor& t, std::size_t mode,
                         const DenseMatrix& m);

// mode_product with diag(d): scales mode-`mode` slice j by d[j].
DenseTensor scale_mode(const DenseTensor& t, std::size_t mode,
                       const std::vector<double>& d);

// Gram matrix of the mode-i matricization: matricize(t,i) * matricize(t,i)^T.
SymMatrix contract(const DenseTensor& t, std::size_t mode);

// Kronecker product, (a.rows*b.rows) x (a.cols*b.cols) blocks a_ij * b.
DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);
SymMatrix kron(const SymMatrix& a, const SymMatrix& b);

// Outer product of k vectors -> order-k tensor with entries prod_i u_i[j_i].
DenseTensor outer(const std::vector<std::vector<double>>& factors);

DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// a * b^T without forming the transpose.
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x);

DenseTensor to_tensor(const DenseMatrix& m);
DenseMatrix to_matrix(const DenseTensor& t);  // order-2 only

}  // namespace shampoo
