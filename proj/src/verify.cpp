#include "shampoo/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "shampoo/harness.hpp"
#include "shampoo/psd.hpp"
#include "shampoo/rng.hpp"
#include "shampoo/tensor.hpp"

namespace shampoo {

namespace {

constexpr double kIdentityTol = 1e-10;
constexpr double kSlackTol = 1e-7;
constexpr double kMonotoneTol = 1e-8;

std::uint64_t entry_seed(std::uint64_t seed, std::uint64_t idx) {
  return seed ^ (0x9e3779b97f4a7c15ULL * (idx + 1));
}

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

DenseMatrix random_dense(Rng& rng, std::size_t r, std::size_t c) {
  DenseMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

DenseTensor random_tensor(Rng& rng, std::vector<std::size_t> shape) {
  DenseTensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

// M M^T / n; exactly symmetric because entry (i,j) and (j,i) are the same
// dot product evaluated in the same order.
SymMatrix random_psd(Rng& rng, std::size_t n) {
  const DenseMatrix m = random_dense(rng, n, n);
  SymMatrix s(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += m(i, k) * m(j, k);
      s.set(i, j, acc / static_cast<double>(n));
    }
  return s;
}

SymMatrix random_spd(Rng& rng, std::size_t n) {
  SymMatrix s = random_psd(rng, n);
  s.add_scaled_identity(0.3 + rng.uniform());
  return s;
}

SymMatrix outer_sym(const std::vector<double>& v, double scale) {
  SymMatrix s(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) s.set(i, j, scale * v[i] * v[j]);
  return s;
}

// Sum of `rank` outer products x y^T, so rank(G) <= rank by construction.
DenseMatrix rank_bounded_matrix(Rng& rng, std::size_t m, std::size_t n,
                                std::size_t rank) {
  DenseMatrix g(m, n);
  for (std::size_t k = 0; k < rank; ++k) {
    const std::vector<double> x = random_vec(rng, m);
    const std::vector<double> y = random_vec(rng, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) g(i, j) += x[i] * y[j];
  }
  return g;
}

// Sum of `terms` rank-one tensors, so every matricization has rank <= terms.
DenseTensor rank_bounded_tensor(Rng& rng, const std::vector<std::size_t>& shape,
                                std::size_t terms) {
  DenseTensor g(shape);
  for (std::size_t k = 0; k < terms; ++k) {
    std::vector<std::vector<double>> factors;
    factors.reserve(shape.size());
    for (std::size_t n_i : shape) factors.push_back(random_vec(rng, n_i));
    const DenseTensor term = outer(factors);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += term[i];
  }
  return g;
}

double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    diff += d * d;
    ref += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(1.0, std::sqrt(ref));
}

double rel_err(const SymMatrix& a, const SymMatrix& b) {
  return (a - b).frobenius_norm() / std::max(1.0, b.frobenius_norm());
}

SymMatrix symmetrized(const DenseMatrix& p) {
  SymMatrix s(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j)
      s.set(i, j, 0.5 * (p(i, j) + p(j, i)));
  return s;
}

DenseMatrix dense_of(const SymMatrix& s) {
  return DenseMatrix(s.dim(), s.dim(), s.values());
}

std::size_t dim_in(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.index(hi - lo + 1);
}

SuiteEntry error_entry(std::string name, std::size_t trials, double worst,
                       double tol = kIdentityTol) {
  return {std::move(name), "max_rel_error", trials, worst, tol, worst <= tol};
}

SuiteEntry slack_entry(std::string name, std::size_t trials, double worst,
                       double tol) {
  return {std::move(name), "min_slack", trials, worst, tol, worst >= -tol};
}

// --- Kronecker/vectorization identity checks ------------------------------

double kron_mixed_product_err(Rng& rng) {
  const std::size_t a = dim_in(rng, 1, 4), b = dim_in(rng, 1, 4),
                    c = dim_in(rng, 1, 4), d = dim_in(rng, 1, 4),
                    e = dim_in(rng, 1, 4), f = dim_in(rng, 1, 4);
  const DenseMatrix a1 = random_dense(rng, a, b), a2 = random_dense(rng, b, c);
  const DenseMatrix b1 = random_dense(rng, d, e), b2 = random_dense(rng, e, f);
  const DenseMatrix lhs = matmul(kron(a1, b1), kron(a2, b2));
  const DenseMatrix rhs = kron(matmul(a1, a2), matmul(b1, b2));
  return rel_err(lhs.values(), rhs.values());
}

double kron_transpose_err(Rng& rng) {
  const DenseMatrix a =
      random_dense(rng, dim_in(rng, 1, 6), dim_in(rng, 1, 6));
  const DenseMatrix b =
      random_dense(rng, dim_in(rng, 1, 6), dim_in(rng, 1, 6));
  return rel_err(transpose(kron(a, b)).values(),
                 kron(transpose(a), transpose(b)).values());
}

double kron_power_err(Rng& rng, bool negate) {
  const SymMatrix a = random_spd(rng, dim_in(rng, 2, 4));
  const SymMatrix b = random_spd(rng, dim_in(rng, 2, 4));
  const double s = negate ? -1.0 : 4.0 * rng.uniform() - 2.0;
  return rel_err(matrix_power(kron(a, b), s),
                 kron(matrix_power(a, s), matrix_power(b, s)));
}

double kron_monotone_err(Rng& rng) {
  const std::size_t da = dim_in(rng, 2, 4), db = dim_in(rng, 2, 4);
  const SymMatrix a_small = random_psd(rng, da);
  const SymMatrix b_small = random_psd(rng, db);
  SymMatrix a_big = a_small;
  a_big.add_scaled(random_psd(rng, da));
  SymMatrix b_big = b_small;
  b_big.add_scaled(random_psd(rng, db));
  const double slack =
      loewner_slack(kron(a_big, b_big), kron(a_small, b_small));
  return std::max(0.0, -slack);
}

double kron_trace_err(Rng& rng) {
  const std::size_t da = dim_in(rng, 1, 6), db = dim_in(rng, 1, 6);
  const DenseMatrix a = random_dense(rng, da, da);
  const DenseMatrix b = random_dense(rng, db, db);
  const DenseMatrix k = kron(a, b);
  double tr_k = 0.0, tr_a = 0.0, tr_b = 0.0;
  for (std::size_t i = 0; i < da * db; ++i) tr_k += k(i, i);
  for (std::size_t i = 0; i < da; ++i) tr_a += a(i, i);
  for (std::size_t i = 0; i < db; ++i) tr_b += b(i, i);
  return std::abs(tr_k - tr_a * tr_b) / std::max(1.0, std::abs(tr_a * tr_b));
}

double vec_outer_err(Rng& rng) {
  const std::size_t m = dim_in(rng, 1, 6), n = dim_in(rng, 1, 6);
  const std::vector<double> u = random_vec(rng, m);
  const std::vector<double> v = random_vec(rng, n);
  const DenseMatrix ku = kron(DenseMatrix(m, 1, u), DenseMatrix(n, 1, v));
  return rel_err(vec(outer({u, v})), ku.values());
}

double two_sided_product_err(Rng& rng) {
  const std::size_t m = dim_in(rng, 1, 6), n = dim_in(rng, 1, 6);
  const DenseTensor g = random_tensor(rng, {m, n});
  const DenseMatrix l = random_dense(rng, m, m);
  const DenseMatrix r = random_dense(rng, n, n);
  const std::vector<double> lhs = matvec(kron(l, transpose(r)), vec(g));
  const DenseMatrix rhs = matmul(matmul(l, to_matrix(g)), r);
  return rel_err(lhs, rhs.values());
}

double mode_product_chain_err(Rng& rng) {
  const std::vector<std::size_t> shape{dim_in(rng, 1, 4), dim_in(rng, 1, 4),
                                       dim_in(rng, 1, 4)};
  const DenseTensor g = random_tensor(rng, shape);
  std::vector<DenseMatrix> m;
  for (std::size_t n_i : shape) m.push_back(random_dense(rng, n_i, n_i));
  const std::vector<double> lhs =
      matvec(kron(kron(m[0], m[1]), m[2]), vec(g));
  DenseTensor chained = mode_product(g, 0, m[0]);
  chained = mode_product(chained, 1, m[1]);
  chained = mode_product(chained, 2, m[2]);
  return rel_err(lhs, vec(chained));
}

double vec_rank_one_err(Rng& rng) {
  const std::vector<double> u = random_vec(rng, dim_in(rng, 1, 6));
  const std::vector<double> v = random_vec(rng, dim_in(rng, 1, 6));
  const std::vector<double> w = random_vec(rng, dim_in(rng, 1, 6));
  const DenseMatrix k =
      kron(kron(DenseMatrix(u.size(), 1, u), DenseMatrix(v.size(), 1, v)),
           DenseMatrix(w.size(), 1, w));
  return rel_err(vec(outer({u, v, w})), k.values());
}

double matricize_rank_one_err(Rng& rng) {
  const std::vector<std::size_t> shape{dim_in(rng, 1, 5), dim_in(rng, 1, 5),
                                       dim_in(rng, 1, 5)};
  std::vector<std::vector<double>> u;
  for (std::size_t n_i : shape) u.push_back(random_vec(rng, n_i));
  const std::size_t i = rng.index(3);
  // kron of the remaining factors in original mode order
  std::vector<double> rest{1.0};
  for (std::size_t j = 0; j < 3; ++j) {
    if (j == i) continue;
    std::vector<double> next(rest.size() * u[j].size());
    for (std::size_t a = 0; a < rest.size(); ++a)
      for (std::size_t b = 0; b < u[j].size(); ++b)
        next[a * u[j].size() + b] = rest[a] * u[j][b];
    rest = std::move(next);
  }
  DenseMatrix expected(shape[i], rest.size());
  for (std::size_t a = 0; a < shape[i]; ++a)
    for (std::size_t b = 0; b < rest.size(); ++b)
      expected(a, b) = u[i][a] * rest[b];
  return rel_err(matricize(outer(u), i).values(), expected.values());
}

double vec_matricize_err(Rng& rng) {
  const std::size_t k = 2 + rng.index(2);
  std::vector<std::size_t> shape;
  for (std::size_t j = 0; j < k; ++j) shape.push_back(dim_in(rng, 1, 5));
  const DenseTensor a = random_tensor(rng, shape);
  const double e1 = rel_err(vec(a), matricize(a, 0).values());
  const double e2 =
      rel_err(vec(a), transpose(matricize(a, k - 1)).values());
  return std::max(e1, e2);
}

double matricize_mode_product_err(Rng& rng) {
  const std::vector<std::size_t> shape{dim_in(rng, 1, 5), dim_in(rng, 1, 5),
                                       dim_in(rng, 1, 5)};
  const DenseTensor a = random_tensor(rng, shape);
  const std::size_t i = rng.index(3);
  const DenseMatrix m = random_dense(rng, shape[i], shape[i]);
  return rel_err(matricize(mode_product(a, i, m), i).values(),
                 matmul(m, matricize(a, i)).values());
}

// --- Loewner-order checks -------------------------------------------------

// (1/r) g g^T vs I (x) G^T G (left = true) or G G^T (x) I (right).
double single_gradient_slack(Rng& rng, bool left, bool force_rank_one) {
  const std::size_t m = dim_in(rng, 2, 3), n = dim_in(rng, 2, 4);
  const std::size_t rank =
      force_rank_one ? 1 : 1 + rng.index(std::min(m, n));
  const DenseTensor g =
      to_tensor(rank_bounded_matrix(rng, m, n, rank));
  const SymMatrix lhs = outer_sym(vec(g), 1.0 / static_cast<double>(rank));
  const SymMatrix rhs =
      left ? kron(SymMatrix::identity(m), contract(g, 1))
           : kron(contract(g, 0), SymMatrix::identity(n));
  return loewner_slack(rhs, lhs);
}

// eps I + (1/r) sum g g^T vs (eps I + sum G G^T)^1/2 (x) (eps I + sum G^T G)^1/2.
double accumulated_slack(Rng& rng, bool identity_probe, double eps) {
  const std::size_t m = identity_probe ? 3 : dim_in(rng, 2, 3);
  const std::size_t n = identity_probe ? 3 : dim_in(rng, 2, 4);
  const std::size_t rank =
      identity_probe ? 3 : 1 + rng.index(std::min(m, n));
  SymMatrix sum_vec(m * n);
  SymMatrix l = SymMatrix::identity(m, eps);
  SymMatrix r = SymMatrix::identity(n, eps);
  for (std::size_t t = 0; t < 4; ++t) {
    DenseTensor g = identity_probe ? DenseTensor({m, n})
                                   : to_tensor(rank_bounded_matrix(rng, m, n,
                                                                   rank));
    if (identity_probe)
      for (std::size_t i = 0; i < m; ++i) g[i * n + i] = 1.0;
    sum_vec.add_scaled(outer_sym(vec(g), 1.0 / static_cast<double>(rank)));
    l.add_scaled(contract(g, 0));
    r.add_scaled(contract(g, 1));
  }
  SymMatrix lhs = sum_vec;
  lhs.add_scaled_identity(eps);
  return loewner_slack(kron(matrix_power(l, 0.5), matrix_power(r, 0.5)), lhs);
}

// (r eps I + sum g g^T)^1/2 vs sqrt(r) L^1/4 (x) R^1/4 with r = min(m, n).
double accumulated_root_slack(Rng& rng, double eps) {
  const std::size_t m = dim_in(rng, 2, 3), n = dim_in(rng, 2, 4);
  const double r = static_cast<double>(std::min(m, n));
  SymMatrix sum_vec(m * n);
  SymMatrix l = SymMatrix::identity(m, eps);
  SymMatrix rr = SymMatrix::identity(n, eps);
  for (std::size_t t = 0; t < 4; ++t) {
    const DenseTensor g = random_tensor(rng, {m, n});
    sum_vec.add_scaled(outer_sym(vec(g), 1.0));
    l.add_scaled(contract(g, 0));
    rr.add_scaled(contract(g, 1));
  }
  sum_vec.add_scaled_identity(r * eps);
  const SymMatrix flat_root = matrix_power(sum_vec, 0.5);
  const SymMatrix kron_root =
      std::sqrt(r) * kron(matrix_power(l, 0.25), matrix_power(rr, 0.25));
  return loewner_slack(kron_root, flat_root);
}

// eps I + sum g g^T vs r * (x)_i (eps I + sum contraction_i)^(1/3), order 3.
double tensor_accumulated_slack(Rng& rng, double eps) {
  const std::vector<std::size_t> shape{2, 3, 2};
  const std::size_t terms = 1 + rng.index(2);
  const double r = static_cast<double>(terms);  // every extent is >= terms
  SymMatrix sum_vec(12);
  std::vector<SymMatrix> stats;
  for (std::size_t n_i : shape) stats.push_back(SymMatrix::identity(n_i, eps));
  for (std::size_t t = 0; t < 3; ++t) {
    const DenseTensor g = rank_bounded_tensor(rng, shape, terms);
    sum_vec.add_scaled(outer_sym(vec(g), 1.0));
    for (std::size_t i = 0; i < 3; ++i) stats[i].add_scaled(contract(g, i));
  }
  SymMatrix lhs = sum_vec;
  lhs.add_scaled_identity(eps);
  const SymMatrix rhs =
      r * kron(kron(matrix_power(stats[0], 1.0 / 3.0),
                    matrix_power(stats[1], 1.0 / 3.0)),
               matrix_power(stats[2], 1.0 / 3.0));
  return loewner_slack(rhs, lhs);
}

// The mode-i matricized ordering predicate and the full vec ordering
// predicate are permutation-similar; their slacks must agree and so must
// their truth values.
double transport_agreement(Rng& rng, bool& truth_agreed) {
  const std::vector<std::size_t> shape{2, 3, 2};
  const DenseTensor g = random_tensor(rng, shape);
  const std::size_t i = rng.index(3);
  const std::size_t n_i = shape[i];
  std::size_t pre = 1, post = 1;
  for (std::size_t j = 0; j < i; ++j) pre *= shape[j];
  for (std::size_t j = i + 1; j < 3; ++j) post *= shape[j];
  const std::size_t rest = pre * post;

  SymMatrix b = contract(g, i);
  const double shift = (rng.uniform() < 0.5 ? 1.0 : -1.0) *
                       0.05 * (1.0 + b.trace() / static_cast<double>(n_i));
  b.add_scaled_identity(shift);

  const std::vector<double> g_i = matricize(g, i).values();
  const double slack_mat =
      loewner_slack(kron(b, SymMatrix::identity(rest)), outer_sym(g_i, 1.0));
  const double slack_vec = loewner_slack(
      kron(SymMatrix::identity(pre), kron(b, SymMatrix::identity(post))),
      outer_sym(vec(g), 1.0));
  truth_agreed = (slack_mat >= -kSlackTol) == (slack_vec >= -kSlackTol);
  return -std::abs(slack_mat - slack_vec);
}

// Weighted geometric mean of commuting PSD pairs is monotone.
double geomean_slack(Rng& rng) {
  const std::size_t d = dim_in(rng, 2, 4);
  const DenseMatrix q = sym_eig(random_psd(rng, d)).eigenvectors;
  const double alpha = rng.uniform();
  SymMatrix x_prod, y_prod;
  {
    DenseMatrix px, py;
    for (std::size_t factor = 0; factor < 2; ++factor) {
      std::vector<double> lx(d), ly(d);
      for (std::size_t j = 0; j < d; ++j) {
        lx[j] = 2.0 * rng.uniform();
        ly[j] = lx[j] + rng.uniform();
      }
      const double w = factor == 0 ? alpha : 1.0 - alpha;
      const SymMatrix xw = matrix_power(reconstruct({lx, q}), w);
      const SymMatrix yw = matrix_power(reconstruct({ly, q}), w);
      if (factor == 0) {
        px = dense_of(xw);
        py = dense_of(yw);
      } else {
        px = matmul(px, dense_of(xw));
        py = matmul(py, dense_of(yw));
      }
    }
    x_prod = symmetrized(px);
    y_prod = symmetrized(py);
  }
  return loewner_slack(y_prod, x_prod);
}

double power_monotone_slack(Rng& rng) {
  const std::size_t d = dim_in(rng, 2, 4);
  const SymMatrix x = random_psd(rng, d);
  SymMatrix y = x;
  y.add_scaled(random_psd(rng, d));
  const double alpha = rng.uniform();
  return loewner_slack(matrix_power(y, alpha), matrix_power(x, alpha));
}

// --- Regret-bound runs ----------------------------------------------------

ExperimentConfig bound_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.problem.family = LossFamily::matrix_least_squares;
  cfg.problem.shape = {8, 5};
  cfg.problem.horizon = 500;
  cfg.problem.batch = 16;
  cfg.problem.cond = 4.0;
  cfg.optimizer.name = "shampoo";
  cfg.optimizer.shampoo.learning_rate = 0.1;
  cfg.optimizer.shampoo.epsilon = 1e-4;
  cfg.optimizer.shampoo.root_update_interval = 1;
  cfg.seed = seed;
  cfg.bound_check = true;
  cfg.record_walltime = false;
  return cfg;
}

SuiteEntry bound_entry(std::string name, const ExperimentConfig& cfg) {
  const RunResult res = run(cfg);
  SuiteEntry entry;
  entry.name = std::move(name);
  entry.metric = "min_slack";
  entry.trials = 1;
  entry.tolerance = 1e-6;
  if (!res.abort_reason.empty() || !res.bound_report.has_value()) {
    entry.worst = -1.0;
    entry.pass = false;
    return entry;
  }
  const BoundReport& br = *res.bound_report;
  entry.worst = br.slack / std::max(1.0, br.bound);
  entry.pass = br.pass;
  return entry;
}

SuiteEntry sublinear_entry(std::uint64_t seed) {
  ExperimentConfig cfg = bound_config(seed);
  cfg.bound_check = false;
  cfg.problem.horizon = 1000;
  const RunResult res = run(cfg);
  SuiteEntry entry;
  entry.name = "sublinear-regret-ratio";
  entry.metric = "min_ratio_drop";
  entry.trials = 1;
  entry.tolerance = 1e-9;
  if (!res.abort_reason.empty() || res.records.size() != 1000) {
    entry.worst = -1.0;
    entry.pass = false;
    return entry;
  }
  // regret/sqrt(t) climbs while the trajectory is still burning in, peaks,
  // then decays once the sqrt-horizon regime takes over. The burn-in window
  // ends at the (latest) peak of the ratio curve; monotonicity is required
  // across the fixed checkpoints beyond it. A ratio still climbing past the
  // midpoint never reaches the regime at all and fails outright.
  std::vector<double> ratio(res.records.size());
  std::size_t burn_in = 1;
  for (std::size_t t = 1; t <= res.records.size(); ++t) {
    ratio[t - 1] =
        res.records[t - 1].regret / std::sqrt(static_cast<double>(t));
    if (ratio[t - 1] >= ratio[burn_in - 1]) burn_in = t;
  }
  if (burn_in > 500) {
    entry.worst = -1.0;
    entry.pass = false;
    return entry;
  }
  double prev = 0.0;
  double min_drop = 0.0;
  bool have_prev = false;
  for (std::size_t t : {std::size_t{250}, std::size_t{500},
                        std::size_t{1000}}) {
    if (t < burn_in) continue;
    if (have_prev) min_drop = std::min(min_drop, prev - ratio[t - 1]);
    prev = ratio[t - 1];
    have_prev = true;
  }
  entry.worst = min_drop;
  entry.pass = entry.worst >= -entry.tolerance;
  return entry;
}

}  // namespace

bool VerifyReport::all_pass() const {
  for (const SuiteEntry& e : entries)
    if (!e.pass) return false;
  return true;
}

VerifyReport verify_kron_suite(std::uint64_t seed, std::size_t trials) {
  struct Item {
    const char* name;
    double (*check)(Rng&);
  };
  VerifyReport report;
  std::uint64_t idx = 0;
  const auto push = [&](const char* name, auto&& metric_of_trial) {
    Rng rng(entry_seed(seed, idx++));
    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t)
      worst = std::max(worst, metric_of_trial(rng, t));
    report.entries.push_back(error_entry(name, trials, worst));
  };
  push("kron-mixed-product",
       [](Rng& rng, std::size_t) { return kron_mixed_product_err(rng); });
  push("kron-transpose",
       [](Rng& rng, std::size_t) { return kron_transpose_err(rng); });
  push("kron-fractional-power", [](Rng& rng, std::size_t t) {
    return kron_power_err(rng, t % 2 == 0);
  });
  push("kron-monotone",
       [](Rng& rng, std::size_t) { return kron_monotone_err(rng); });
  push("kron-trace",
       [](Rng& rng, std::size_t) { return kron_trace_err(rng); });
  push("vec-of-outer-product",
       [](Rng& rng, std::size_t) { return vec_outer_err(rng); });
  push("kron-two-sided-product",
       [](Rng& rng, std::size_t) { return two_sided_product_err(rng); });
  push("kron-mode-product-chain",
       [](Rng& rng, std::size_t) { return mode_product_chain_err(rng); });
  push("vec-of-rank-one-tensor",
       [](Rng& rng, std::size_t) { return vec_rank_one_err(rng); });
  push("matricize-of-rank-one",
       [](Rng& rng, std::size_t) { return matricize_rank_one_err(rng); });
  push("vec-of-matricize",
       [](Rng& rng, std::size_t) { return vec_matricize_err(rng); });
  push("matricize-of-mode-product",
       [](Rng& rng, std::size_t) { return matricize_mode_product_err(rng); });
  return report;
}

VerifyReport verify_loewner_suite(std::uint64_t seed, std::size_t trials) {
  VerifyReport report;
  std::uint64_t idx = 100;
  const auto push = [&](const char* name, double tol,
                        auto&& slack_of_trial) {
    Rng rng(entry_seed(seed, idx++));
    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      worst = std::min(worst, slack_of_trial(rng, t));
    }
    report.entries.push_back(slack_entry(name, trials, worst, tol));
  };
  const double eps_cycle[3] = {0.0, 1e-3, 0.5};
  push("vectorized-gradient-left", kSlackTol, [](Rng& rng, std::size_t t) {
    return single_gradient_slack(rng, true, t == 0);
  });
  push("vectorized-gradient-right", kSlackTol, [](Rng& rng, std::size_t t) {
    return single_gradient_slack(rng, false, t == 0);
  });
  push("accumulated-vectorized", kSlackTol,
       [&eps_cycle](Rng& rng, std::size_t t) {
         return accumulated_slack(rng, t == 0, eps_cycle[t % 3]);
       });
  push("accumulated-root-dominance", kSlackTol,
       [](Rng& rng, std::size_t t) {
         const double eps[3] = {1e-4, 1e-2, 1.0};
         return accumulated_root_slack(rng, eps[t % 3]);
       });
  push("tensor-accumulated-vectorized", kSlackTol,
       [&eps_cycle](Rng& rng, std::size_t t) {
         return tensor_accumulated_slack(rng, eps_cycle[t % 3]);
       });
  push("matricized-transport-equivalence", kSlackTol,
       [](Rng& rng, std::size_t) {
         bool agreed = true;
         const double delta = transport_agreement(rng, agreed);
         return agreed ? delta : -1.0;
       });
  push("geometric-mean-monotone", kMonotoneTol,
       [](Rng& rng, std::size_t) { return geomean_slack(rng); });
  push("fractional-power-monotone", kMonotoneTol,
       [](Rng& rng, std::size_t) { return power_monotone_slack(rng); });
  return report;
}

VerifyReport verify_bounds_suite(std::uint64_t seed) {
  VerifyReport report;

  report.entries.push_back(bound_entry("matrix-regret-bound",
                                       bound_config(seed)));

  ExperimentConfig tensor_cfg = bound_config(seed);
  tensor_cfg.problem.family = LossFamily::tensor_regression;
  tensor_cfg.problem.shape = {4, 3, 3};
  tensor_cfg.problem.mode_ranks = {2, 2, 2};
  tensor_cfg.problem.batch = 8;
  tensor_cfg.problem.cond = 1.0;
  report.entries.push_back(bound_entry("tensor-regret-bound", tensor_cfg));

  ExperimentConfig diag_cfg = bound_config(seed);
  diag_cfg.optimizer.shampoo.mode_overrides[0] = ModeVariant::diagonal;
  diag_cfg.optimizer.shampoo.mode_overrides[1] = ModeVariant::diagonal;
  report.entries.push_back(bound_entry("diagonal-regret-bound", diag_cfg));

  report.entries.push_back(sublinear_entry(seed));
  return report;
}

VerifyReport verify_all(std::uint64_t seed, std::size_t trials) {
  VerifyReport report = verify_kron_suite(seed, trials);
  VerifyReport loewner = verify_loewner_suite(seed, trials);
  VerifyReport bounds = verify_bounds_suite(seed);
  report.entries.insert(report.entries.end(), loewner.entries.begin(),
                        loewner.entries.end());
  report.entries.insert(report.entries.end(), bounds.entries.begin(),
                        bounds.entries.end());
  return report;
}

}  // namespace shampoo
