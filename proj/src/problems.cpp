#include "shampoo/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "shampoo/kernels.hpp"
#include "shampoo/psd.hpp"
#include "shampoo/rng.hpp"

namespace shampoo {

namespace {

// Orthonormalizes the columns of e in place (rows >= cols). Two projection
// passes of modified Gram-Schmidt per column; a column that collapses is
// resampled, which for Gaussian fills is a measure-zero event.
void orthonormalize_columns(DenseMatrix& e, Rng& rng) {
  const std::size_t rows = e.rows(), cols = e.cols();
  for (std::size_t j = 0; j < cols; ++j) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < j; ++k) {
          double dot = 0.0;
          for (std::size_t i = 0; i < rows; ++i) dot += e(i, k) * e(i, j);
          for (std::size_t i = 0; i < rows; ++i) e(i, j) -= dot * e(i, k);
        }
      }
      double norm = 0.0;
      for (std::size_t i = 0; i < rows; ++i) norm += e(i, j) * e(i, j);
      norm = std::sqrt(norm);
      if (norm > 1e-10) {
        for (std::size_t i = 0; i < rows; ++i) e(i, j) /= norm;
        break;
      }
      for (std::size_t i = 0; i < rows; ++i) e(i, j) = rng.normal();
      if (attempt == 99)
        throw std::runtime_error("design sampling degenerated");
    }
  }
}

DenseMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Moore-Penrose application y = pinv(a) * b column-wise; eigenvalues at or
// below 1e-12 * lambda_max are treated as exact zeros (min-norm solution).
DenseMatrix pinv_apply(const SymMatrix& a, const DenseMatrix& b) {
  const EigenPair e = sym_eig(a);
  const double lmax = e.eigenvalues.empty() ? 0.0 : e.eigenvalues.front();
  const double tau = 1e-12 * std::max(lmax, 0.0);
  DenseMatrix scaled = matmul(transpose(e.eigenvectors), b);
  for (std::size_t i = 0; i < scaled.rows(); ++i) {
    const double lam = e.eigenvalues[i];
    const double inv = lam > tau && lam > 0.0 ? 1.0 / lam : 0.0;
    for (std::size_t j = 0; j < scaled.cols(); ++j) scaled(i, j) *= inv;
  }
  return matmul(e.eigenvectors, scaled);
}

}  // namespace

const char* family_name(LossFamily family) {
  switch (family) {
    case LossFamily::matrix_least_squares:
      return "matrix_least_squares";
    case LossFamily::multiclass_logistic:
      return "multiclass_logistic";
    case LossFamily::tensor_regression:
      return "tensor_regression";
  }
  throw std::invalid_argument("unknown loss family");
}

LossFamily family_from_name(const std::string& name) {
  if (name == "matrix_least_squares") return LossFamily::matrix_least_squares;
  if (name == "multiclass_logistic") return LossFamily::multiclass_logistic;
  if (name == "tensor_regression") return LossFamily::tensor_regression;
  throw std::invalid_argument("unknown loss family: " + name);
}

void ProblemSpec::validate() const {
  if (shape.empty())
    throw std::invalid_argument("problem spec: shape must be non-empty");
  for (std::size_t n : shape)
    if (n == 0) throw std::invalid_argument("problem spec: zero extent");
  if (batch == 0)
    throw std::invalid_argument("problem spec: batch must be >= 1");
  if (!(cond >= 1.0))
    throw std::invalid_argument("problem spec: cond must be >= 1");
  if (!mode_ranks.empty()) {
    if (mode_ranks.size() != shape.size())
      throw std::invalid_argument(
          "problem spec: mode_ranks must have one entry per mode");
    for (std::size_t i = 0; i < shape.size(); ++i)
      if (mode_ranks[i] == 0 || mode_ranks[i] > shape[i])
        throw std::invalid_argument(
            "problem spec: mode rank " + std::to_string(mode_ranks[i]) +
            " outside [1, " + std::to_string(shape[i]) + "]");
  }
  switch (family) {
    case LossFamily::matrix_least_squares: {
      if (shape.size() != 2)
        throw std::invalid_argument(
            "matrix_least_squares needs an order-2 shape");
      if (!mode_ranks.empty() && mode_ranks[0] != mode_ranks[1])
        throw std::invalid_argument(
            "matrix_least_squares: a matrix has one rank; mode_ranks entries "
            "must be equal");
      const std::size_t r =
          mode_ranks.empty() ? std::min({shape[0], shape[1], batch})
                             : mode_ranks[0];
      if (r > batch)
        throw std::invalid_argument(
            "matrix_least_squares: rank bound exceeds batch size");
      if (cond > 1.0 && r < 2)
        throw std::invalid_argument(
            "matrix_least_squares: cond > 1 needs rank >= 2");
      break;
    }
    case LossFamily::multiclass_logistic: {
      if (shape.size() != 2)
        throw std::invalid_argument(
            "multiclass_logistic needs an order-2 shape (classes x features)");
      if (shape[0] < 2)
        throw std::invalid_argument(
            "multiclass_logistic needs at least 2 classes");
      if (!mode_ranks.empty())
        throw std::invalid_argument(
            "multiclass_logistic does not control gradient ranks");
      if (cond != 1.0)
        throw std::invalid_argument(
            "cond is only adjustable for matrix_least_squares");
      break;
    }
    case LossFamily::tensor_regression: {
      if (cond != 1.0)
        throw std::invalid_argument(
            "cond is only adjustable for matrix_least_squares");
      break;
    }
  }
}

OnlineProblem::OnlineProblem(ProblemSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), seed_(seed) {
  spec_.validate();
  Rng rng(seed_);
  switch (spec_.family) {
    case LossFamily::matrix_least_squares:
      build_least_squares(rng);
      break;
    case LossFamily::multiclass_logistic:
      build_logistic(rng);
      break;
    case LossFamily::tensor_regression:
      build_tensor_regression(rng);
      break;
  }
}

void OnlineProblem::build_least_squares(Rng& rng) {
  const std::size_t m = spec_.shape[0];
  const std::size_t b = spec_.batch, t_max = spec_.horizon;
  const std::size_t r = mode_rank_bounds()[0];

  planted_ = DenseTensor(spec_.shape);
  for (std::size_t i = 0; i < planted_.size(); ++i)
    planted_.data()[i] = rng.normal();

  // Fixed orthogonal frame for the design row space. Rank-deficient designs
  // (r < m) use a fresh random size-r subset of its columns each step so
  // accumulators fill out over time while every gradient keeps rank <= r.
  SymMatrix sym(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= i; ++j) sym.set(i, j, rng.normal());
  const DenseMatrix q = sym_eig(sym).eigenvectors;

  // Log-spaced spectrum of (1/b) X^T X on its range: exactly [1, cond].
  std::vector<double> root_lam(r, 1.0);
  if (r >= 2)
    for (std::size_t j = 0; j < r; ++j)
      root_lam[j] = std::sqrt(std::pow(
          spec_.cond, static_cast<double>(j) / static_cast<double>(r - 1)));

  const double sqb = std::sqrt(static_cast<double>(b));
  const DenseMatrix planted_mat = to_matrix(planted_);
  ls_x_.reserve(t_max);
  ls_y_.reserve(t_max);
  std::vector<std::size_t> perm(m);
  for (std::size_t t = 0; t < t_max; ++t) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    // Full-rank designs keep the spectrum-to-direction assignment fixed for
    // the whole horizon: cond describes one ill-conditioned quadratic, not
    // merely each step's design. Reshuffling it per step would let a plain
    // gradient method treat every direction as fast eventually.
    if (r < m)
      for (std::size_t j = 0; j < r; ++j)
        std::swap(perm[j], perm[j + rng.index(m - j)]);
    DenseMatrix e = random_matrix(rng, b, r);
    orthonormalize_columns(e, rng);
    DenseMatrix x(b, m);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < r; ++j) {
        const double c = sqb * e(i, j) * root_lam[j];
        for (std::size_t a = 0; a < m; ++a) x(i, a) += c * q(a, perm[j]);
      }
    ls_y_.push_back(matmul(x, planted_mat));
    ls_x_.push_back(std::move(x));
  }
}

void OnlineProblem::build_logistic(Rng& rng) {
  const std::size_t c = spec_.shape[0];
  logit_x_.reserve(spec_.horizon);
  logit_y_.reserve(spec_.horizon);
  for (std::size_t t = 0; t < spec_.horizon; ++t) {
    logit_x_.push_back(random_matrix(rng, spec_.batch, spec_.shape[1]));
    std::vector<std::size_t> labels(spec_.batch);
    for (std::size_t i = 0; i < spec_.batch; ++i) labels[i] = rng.index(c);
    logit_y_.push_back(std::move(labels));
  }
}

void OnlineProblem::build_tensor_regression(Rng& rng) {
  const std::size_t k = spec_.shape.size();
  const std::size_t total = DenseTensor(spec_.shape).size();
  const std::vector<std::size_t> ranks = mode_rank_bounds();

  planted_ = DenseTensor(spec_.shape);
  for (std::size_t i = 0; i < planted_.size(); ++i)
    planted_.data()[i] = rng.normal();

  tr_a_.reserve(spec_.horizon);
  tr_y_.reserve(spec_.horizon);
  for (std::size_t t = 0; t < spec_.horizon; ++t) {
    // Fresh per-mode factor pools; each measurement is the outer product of
    // one pick per mode, capping the mode-i gradient rank at the pool size.
    std::vector<DenseMatrix> pools;
    pools.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
      pools.push_back(random_matrix(rng, ranks[i], spec_.shape[i]));
    DenseMatrix a(spec_.batch, total);
    std::vector<double> y(spec_.batch);
    std::vector<std::vector<double>> factors(k);
    for (std::size_t j = 0; j < spec_.batch; ++j) {
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t pick = rng.index(ranks[i]);
        factors[i].assign(pools[i].row(pick),
                          pools[i].row(pick) + spec_.shape[i]);
      }
      const DenseTensor meas = outer(factors);
      std::copy(meas.values().begin(), meas.values().end(), a.row(j));
      y[j] = kernels::dot(meas.data(), planted_.data(), total);
    }
    tr_a_.push_back(std::move(a));
    tr_y_.push_back(std::move(y));
  }
}

void OnlineProblem::check_step(std::size_t t) const {
  if (t < 1 || t > spec_.horizon)
    throw std::out_of_range("step index " + std::to_string(t) +
                            " outside [1, " + std::to_string(spec_.horizon) +
                            "]");
}

double OnlineProblem::loss(std::size_t t, const DenseTensor& w) const {
  return loss_and_grad_impl(t, w, nullptr);
}

std::pair<double, DenseTensor> OnlineProblem::loss_and_grad(
    std::size_t t, const DenseTensor& w) const {
  DenseTensor grad(spec_.shape);
  const double f = loss_and_grad_impl(t, w, &grad);
  return {f, std::move(grad)};
}

double OnlineProblem::loss_and_grad_impl(std::size_t t, const DenseTensor& w,
                                         DenseTensor* grad) const {
  check_step(t);
  if (w.shape() != spec_.shape)
    throw std::invalid_argument("parameter shape does not match the problem");
  switch (spec_.family) {
    case LossFamily::matrix_least_squares:
      return ls_loss(t, w, grad);
    case LossFamily::multiclass_logistic:
      return logistic_loss(t, w, grad);
    case LossFamily::tensor_regression:
      return tr_loss(t, w, grad);
  }
  throw std::logic_error("unreachable loss family");
}

double OnlineProblem::ls_loss(std::size_t t, const DenseTensor& w,
                              DenseTensor* grad) const {
  const DenseMatrix& x = ls_x_[t - 1];
  const DenseMatrix& y = ls_y_[t - 1];
  const double inv_b = 1.0 / static_cast<double>(spec_.batch);
  DenseMatrix res = matmul(x, to_matrix(w));
  for (std::size_t i = 0; i < res.size(); ++i) res.data()[i] -= y.data()[i];
  const double loss =
      0.5 * inv_b * kernels::sumsq(res.data(), res.size());
  if (grad) {
    DenseMatrix g = matmul(transpose(x), res);
    for (std::size_t i = 0; i < g.size(); ++i)
      grad->data()[i] = inv_b * g.data()[i];
  }
  return loss;
}

double OnlineProblem::logistic_loss(std::size_t t, const DenseTensor& w,
                                    DenseTensor* grad) const {
  const DenseMatrix& x = logit_x_[t - 1];
  const std::vector<std::size_t>& labels = logit_y_[t - 1];
  const std::size_t b = spec_.batch, c = spec_.shape[0];
  const double inv_b = 1.0 / static_cast<double>(b);
  DenseMatrix p = matmul_nt(x, to_matrix(w));  // logits, then softmax in place
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    double zmax = p(i, 0);
    for (std::size_t j = 1; j < c; ++j) zmax = std::max(zmax, p(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) denom += std::exp(p(i, j) - zmax);
    loss_sum += zmax + std::log(denom) - p(i, labels[i]);
    for (std::size_t j = 0; j < c; ++j)
      p(i, j) = std::exp(p(i, j) - zmax) / denom;
  }
  const double ridge_term =
      0.5 * kLogisticRidge * kernels::sumsq(w.data(), w.size());
  if (grad) {
    for (std::size_t i = 0; i < b; ++i) p(i, labels[i]) -= 1.0;
    DenseMatrix g = matmul(transpose(p), x);
    for (std::size_t i = 0; i < g.size(); ++i)
      grad->data()[i] = inv_b * g.data()[i] + kLogisticRidge * w[i];
  }
  return inv_b * loss_sum + ridge_term;
}

double OnlineProblem::tr_loss(std::size_t t, const DenseTensor& w,
                              DenseTensor* grad) const {
  const DenseMatrix& a = tr_a_[t - 1];
  const std::vector<double>& y = tr_y_[t - 1];
  const std::size_t total = w.size();
  const double inv_b = 1.0 / static_cast<double>(spec_.batch);
  if (grad) grad->fill(0.0);
  double loss = 0.0;
  for (std::size_t j = 0; j < spec_.batch; ++j) {
    const double res = kernels::dot(a.row(j), w.data(), total) - y[j];
    loss += res * res;
    if (grad) kernels::axpy(inv_b * res, a.row(j), grad->data(), total);
  }
  return 0.5 * inv_b * loss;
}

std::vector<std::size_t> OnlineProblem::mode_rank_bounds() const {
  if (!spec_.mode_ranks.empty()) return spec_.mode_ranks;
  if (spec_.family == LossFamily::matrix_least_squares) {
    const std::size_t r =
        std::min({spec_.shape[0], spec_.shape[1], spec_.batch});
    return {r, r};
  }
  return spec_.shape;  // full-rank default
}

double OnlineProblem::rank_bound() const {
  const std::vector<std::size_t> ranks = mode_rank_bounds();
  double log_sum = 0.0;
  for (std::size_t r : ranks) log_sum += std::log(static_cast<double>(r));
  return std::exp(log_sum / static_cast<double>(ranks.size()));
}

std::string OnlineProblem::fingerprint() const {
  std::ostringstream out;
  out << family_name(spec_.family) << " shape=";
  for (std::size_t i = 0; i < spec_.shape.size(); ++i)
    out << (i ? "x" : "") << spec_.shape[i];
  out << " ranks=";
  const std::vector<std::size_t> ranks = mode_rank_bounds();
  for (std::size_t i = 0; i < ranks.size(); ++i)
    out << (i ? "," : "") << ranks[i];
  out << " cond=" << spec_.cond << " T=" << spec_.horizon
      << " batch=" << spec_.batch << " seed=" << seed_;
  return out.str();
}

const DenseTensor& OnlineProblem::planted() const {
  if (spec_.family == LossFamily::multiclass_logistic)
    throw std::logic_error("multiclass_logistic has no planted parameter");
  return planted_;
}

Comparator OnlineProblem::solve_offline(const OfflineSolveOptions& opts) const {
  Comparator out;
  out.problem_fingerprint = fingerprint();
  if (spec_.horizon == 0) {
    out.w_star = DenseTensor(spec_.shape);
    return out;
  }
  switch (spec_.family) {
    case LossFamily::matrix_least_squares:
    case LossFamily::tensor_regression: {
      out.w_star = normal_equation_solution();
      break;
    }
    case LossFamily::multiclass_logistic: {
      out.w_star = descent_solution(opts);
      break;
    }
  }
  double objective = 0.0;
  for (std::size_t t = 1; t <= spec_.horizon; ++t)
    objective += loss(t, out.w_star);
  out.offline_objective = objective;
  return out;
}

DenseTensor OnlineProblem::normal_equation_solution() const {
  const double inv_b = 1.0 / static_cast<double>(spec_.batch);
  if (spec_.family == LossFamily::matrix_least_squares) {
    const std::size_t m = spec_.shape[0], n = spec_.shape[1];
    SymMatrix lhs(m);
    DenseMatrix rhs(m, n);
    for (std::size_t t = 0; t < spec_.horizon; ++t) {
      const DenseMatrix& x = ls_x_[t];
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
          double dot = 0.0;
          for (std::size_t row = 0; row < x.rows(); ++row)
            dot += x(row, i) * x(row, j);
          lhs.set(i, j, lhs(i, j) + inv_b * dot);
        }
      const DenseMatrix xty = matmul(transpose(x), ls_y_[t]);
      for (std::size_t i = 0; i < rhs.size(); ++i)
        rhs.data()[i] += inv_b * xty.data()[i];
    }
    return to_tensor(pinv_apply(lhs, rhs));
  }
  const std::size_t total = DenseTensor(spec_.shape).size();
  if (total > 4096)
    throw std::invalid_argument(
        "offline solve needs a flattened dimension <= 4096");
  SymMatrix lhs(total);
  DenseMatrix rhs(total, 1);
  for (std::size_t t = 0; t < spec_.horizon; ++t) {
    const DenseMatrix& a = tr_a_[t];
    for (std::size_t j = 0; j < spec_.batch; ++j) {
      const double* row = a.row(j);
      for (std::size_t p = 0; p < total; ++p) {
        if (row[p] == 0.0) continue;
        const double cp = inv_b * row[p];
        for (std::size_t q = 0; q <= p; ++q)
          lhs.set(p, q, lhs(p, q) + cp * row[q]);
        rhs(p, 0) += cp * tr_y_[t][j];
      }
    }
  }
  const DenseMatrix sol = pinv_apply(lhs, rhs);
  return DenseTensor(spec_.shape, sol.values());
}

DenseTensor OnlineProblem::descent_solution(
    const OfflineSolveOptions& opts) const {
  const double inv_t = 1.0 / static_cast<double>(spec_.horizon);
  auto mean_grad = [&](const DenseTensor& w, DenseTensor& g) {
    g.fill(0.0);
    for (std::size_t t = 1; t <= spec_.horizon; ++t) {
      auto [ft, gt] = loss_and_grad(t, w);
      kernels::axpy(inv_t, gt.data(), g.data(), g.size());
    }
  };

  // Constant-step descent with the step taken from a smoothness bound: the
  // softmax Hessian is at most (1/2)I, so the mean objective is L-smooth with
  // L <= (1/2) lambda_max(mean feature second moment) + ridge. A certified
  // step avoids line searches, whose objective-difference tests bottom out at
  // the representable resolution of the loss long before the gradient does.
  const std::size_t d = spec_.shape[1];
  SymMatrix second_moment(d);
  const double scale = inv_t / static_cast<double>(spec_.batch);
  for (std::size_t t = 0; t < spec_.horizon; ++t) {
    const DenseMatrix& x = logit_x_[t];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double dot = 0.0;
        for (std::size_t row = 0; row < x.rows(); ++row)
          dot += x(row, i) * x(row, j);
        second_moment.set(i, j, second_moment(i, j) + scale * dot);
      }
  }
  const EigenPair moment_eig = sym_eig(second_moment);
  const double smoothness =
      0.5 * std::max(moment_eig.eigenvalues.front(), 0.0) + kLogisticRidge;
  const double eta = 1.0 / smoothness;

  auto run = [&](DenseTensor w) {
    DenseTensor g(spec_.shape);
    double gn = 0.0;
    for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
      mean_grad(w, g);
      gn = g.frobenius_norm();
      if (gn <= opts.gradient_tolerance) return w;
      kernels::axpy(-eta, g.data(), w.data(), w.size());
    }
    std::ostringstream msg;
    msg << "offline solve did not converge after " << opts.max_iterations
        << " iterations: gradient norm " << gn;
    throw std::runtime_error(msg.str());
  };

  DenseTensor first = run(DenseTensor(spec_.shape));
  Rng rng(seed_ ^ 0x9e3779b97f4a7c15ULL);
  DenseTensor init2(spec_.shape);
  for (std::size_t i = 0; i < init2.size(); ++i)
    init2.data()[i] = 0.5 * rng.normal();
  DenseTensor second = run(std::move(init2));

  double f1 = 0.0, f2 = 0.0;
  for (std::size_t t = 1; t <= spec_.horizon; ++t) {
    f1 += loss(t, first);
    f2 += loss(t, second);
  }
  if (std::abs(f1 - f2) >
      opts.certify_tolerance * std::max(1.0, std::abs(f1))) {
    std::ostringstream msg;
    msg << "offline solutions disagree: objectives " << f1 << " and " << f2;
    throw std::runtime_error(msg.str());
  }
  return f1 <= f2 ? first : second;
}

std::size_t numerical_mode_rank(const DenseTensor& g, std::size_t mode,
                                double tol) {
  // Singular values through the symmetric embedding [[0, M], [M^T, 0]], whose
  // spectrum is {+-sigma_i} plus zeros. Unlike the Gram matrix route this
  // resolves sigma near the eigensolver's absolute noise floor instead of its
  // square root, which matters at certification tolerances of 1e-10.
  const DenseMatrix m = matricize(g, mode);
  SymMatrix embedding(m.rows() + m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      embedding.set(i, m.rows() + j, m(i, j));
  const EigenPair e = sym_eig(embedding);
  const double smax =
      e.eigenvalues.empty() ? 0.0 : std::max(e.eigenvalues.front(), 0.0);
  if (smax == 0.0) return 0;
  std::size_t rank = 0;
  for (double lam : e.eigenvalues)
    if (lam > tol * smax) ++rank;
  return rank;
}

}  // namespace shampoo
