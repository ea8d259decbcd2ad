#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shampoo/tensor.hpp"

namespace shampoo {

enum class LossFamily { matrix_least_squares, multiclass_logistic,
                        tensor_regression };

const char* family_name(LossFamily family);
LossFamily family_from_name(const std::string& name);

// Ridge added to the logistic loss so the offline comparator is unique and
// full-batch descent converges at a certified objective.
inline constexpr double kLogisticRidge = 1e-3;

struct ProblemSpec {
  LossFamily family = LossFamily::matrix_least_squares;
  std::vector<std::size_t> shape;
  // Per-mode gradient rank bounds; empty means the family default (as large
  // as the construction allows). When given, gradients certify against them.
  std::vector<std::size_t> mode_ranks;
  double cond = 1.0;  // nonzero-Hessian eigenvalue ratio (least squares only)
  std::size_t horizon = 0;
  std::size_t batch = 16;

  void validate() const;  // throws std::invalid_argument
};

struct Comparator {
  DenseTensor w_star;
  double offline_objective = 0.0;  // sum over the horizon at w_star
  double d = 0.0;      // max_t ||W_t - w_star||_F, filled by the harness
  double d_inf = 0.0;  // max_t ||W_t - w_star||_inf, filled by the harness
  std::string problem_fingerprint;
};

struct OfflineSolveOptions {
  std::size_t max_iterations = 200000;
  double gradient_tolerance = 1e-9;
  // Two independent descent runs must land within this relative distance of
  // each other for the objective to count as certified.
  double certify_tolerance = 1e-8;
};

// A fully materialized online convex problem: every step's data is drawn up
// front from the seed, so loss evaluation is pure and repeatable.
class OnlineProblem {
 public:
  OnlineProblem(ProblemSpec spec, std::uint64_t seed);

  const ProblemSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<std::size_t>& shape() const { return spec_.shape; }
  std::size_t horizon() const { return spec_.horizon; }

  // Steps are 1-based; t outside [1, horizon] throws std::out_of_range.
  double loss(std::size_t t, const DenseTensor& w) const;
  std::pair<double, DenseTensor> loss_and_grad(std::size_t t,
                                               const DenseTensor& w) const;

  Comparator solve_offline(const OfflineSolveOptions& opts = {}) const;

  // Resolved per-mode rank bounds (spec values, or the family default).
  std::vector<std::size_t> mode_rank_bounds() const;
  // Geometric-mean rank (prod_i r_i)^(1/k); equals r_0 for square-rank
  // matrices, which is the quantity the regret bounds scale with.
  double rank_bound() const;

  // Identity string: family, shape, ranks, cond, horizon, batch, seed.
  std::string fingerprint() const;

  // Planted parameter for the noiseless regression families; throws for
  // multiclass_logistic, which has no planted model.
  const DenseTensor& planted() const;

 private:
  void check_step(std::size_t t) const;
  void build_least_squares(class Rng& rng);
  void build_logistic(class Rng& rng);
  void build_tensor_regression(class Rng& rng);

  double loss_and_grad_impl(std::size_t t, const DenseTensor& w,
                            DenseTensor* grad) const;
  double ls_loss(std::size_t t, const DenseTensor& w, DenseTensor* grad) const;
  double logistic_loss(std::size_t t, const DenseTensor& w,
                       DenseTensor* grad) const;
  double tr_loss(std::size_t t, const DenseTensor& w, DenseTensor* grad) const;

  DenseTensor normal_equation_solution() const;
  DenseTensor descent_solution(const OfflineSolveOptions& opts) const;

  ProblemSpec spec_;
  std::uint64_t seed_ = 0;
  DenseTensor planted_;

  // matrix_least_squares: per-step design X_t (batch x m) and targets
  // Y_t = X_t * planted (batch x n).
  std::vector<DenseMatrix> ls_x_;
  std::vector<DenseMatrix> ls_y_;

  // multiclass_logistic: per-step features (batch x d) and labels in [0, c).
  std::vector<DenseMatrix> logit_x_;
  std::vector<std::vector<std::size_t>> logit_y_;

  // tensor_regression: per-step measurement rows vec(A_{t,j}) (batch x N)
  // and responses y_{t,j} = <A_{t,j}, planted>.
  std::vector<DenseMatrix> tr_a_;
  std::vector<std::vector<double>> tr_y_;
};

// Rank of the mode-i matricization: singular values above tol * sigma_max
// count. Computed through the symmetric [[0,M],[M^T,0]] embedding so small
// singular values are not lost to squaring.
std::size_t numerical_mode_rank(const DenseTensor& g, std::size_t mode,
                                double tol = 1e-10);

}  // namespace shampoo
