#pragma once

#include <cstddef>
#include <vector>

namespace shampoo {

// Dense symmetric matrix, row-major full storage. Construction from raw data
// validates symmetry to 1e-12 (relative) and then mirrors the upper triangle
// so the stored representation is exactly symmetric; mutating ops keep it so.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim);
  SymMatrix(std::size_t dim, std::vector<double> data);

  static SymMatrix identity(std::size_t dim, double scale = 1.0);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return data_.size(); }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * dim_ + j];
  }
  // Writes both (i,j) and (j,i).
  void set(std::size_t i, std::size_t j, double v) {
    data_[i * dim_ + j] = v;
    data_[j * dim_ + i] = v;
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  // this += a * other
  void add_scaled(const SymMatrix& other, double a = 1.0);
  void add_scaled_identity(double a);

  double trace() const;
  double frobenius_norm() const;

  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

SymMatrix operator*(double a, const SymMatrix& m);

}  // namespace shampoo
