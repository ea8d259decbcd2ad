#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "shampoo/problems.hpp"
#include "shampoo/psd.hpp"
#include "shampoo/tensor.hpp"

using namespace shampoo;
using testutil::bits_equal;

namespace {

ProblemSpec ls_spec(std::vector<std::size_t> shape, std::size_t horizon,
                    std::vector<std::size_t> ranks = {}, double cond = 1.0,
                    std::size_t batch = 8) {
  ProblemSpec s;
  s.family = LossFamily::matrix_least_squares;
  s.shape = std::move(shape);
  s.mode_ranks = std::move(ranks);
  s.cond = cond;
  s.horizon = horizon;
  s.batch = batch;
  return s;
}

// Central finite differences of the loss around w versus the analytic
// gradient; the quadratic families are exact, logistic is O(h^2).
void check_gradient_fd(const OnlineProblem& p, std::size_t t,
                       const DenseTensor& w) {
  auto [f, g] = p.loss_and_grad(t, w);
  CHECK(f == doctest::Approx(p.loss(t, w)).epsilon(1e-15));
  const double h = 1e-6;
  DenseTensor fd(w.shape());
  for (std::size_t i = 0; i < w.size(); ++i) {
    DenseTensor up = w, dn = w;
    up[i] += h;
    dn[i] -= h;
    fd[i] = (p.loss(t, up) - p.loss(t, dn)) / (2.0 * h);
  }
  CHECK(testutil::rel_diff(fd.values(), g.values()) <= 1e-5);
}

}  // namespace

TEST_SUITE("problems") {

TEST_CASE("family names round-trip and unknown names are rejected") {
  for (LossFamily f :
       {LossFamily::matrix_least_squares, LossFamily::multiclass_logistic,
        LossFamily::tensor_regression}) {
    CHECK(family_from_name(family_name(f)) == f);
  }
  CHECK_THROWS_AS(family_from_name("hinge"), std::invalid_argument);
}

TEST_CASE("spec validation rejects malformed problems") {
  auto rejects = [](ProblemSpec s) {
    CHECK_THROWS_AS(OnlineProblem(std::move(s), 1), std::invalid_argument);
  };
  rejects(ls_spec({}, 5));
  rejects(ls_spec({4, 0}, 5));
  rejects(ls_spec({4, 3, 2}, 5));            // least squares is order-2
  rejects(ls_spec({4, 3}, 5, {2, 3}));       // matrix rank is one number
  rejects(ls_spec({4, 3}, 5, {0, 0}));
  rejects(ls_spec({4, 3}, 5, {5, 5}));       // rank above extent
  rejects(ls_spec({4, 3}, 5, {3}));          // wrong rank count
  rejects(ls_spec({4, 3}, 5, {1, 1}, 10.0)); // cond needs rank >= 2
  rejects(ls_spec({4, 3}, 5, {}, 0.5));      // cond below 1
  rejects(ls_spec({8, 8}, 5, {6, 6}, 1.0, 4));  // rank above batch
  {
    ProblemSpec s = ls_spec({4, 3}, 5);
    s.batch = 0;
    rejects(s);
  }
  {
    ProblemSpec s = ls_spec({4, 3}, 5);
    s.family = LossFamily::multiclass_logistic;
    s.cond = 2.0;  // only least squares controls conditioning
    rejects(s);
  }
  {
    ProblemSpec s = ls_spec({4, 3}, 5);
    s.family = LossFamily::multiclass_logistic;
    s.mode_ranks = {4, 3};  // logistic gradients are not rank-controlled
    rejects(s);
  }
  {
    ProblemSpec s = ls_spec({1, 3}, 5);
    s.family = LossFamily::multiclass_logistic;  // needs >= 2 classes
    rejects(s);
  }
  {
    ProblemSpec s;
    s.family = LossFamily::tensor_regression;
    s.shape = {2, 3, 2};
    s.cond = 3.0;
    s.horizon = 5;
    rejects(s);
  }
}

TEST_CASE("identical seeds reproduce the problem bit for bit") {
  const ProblemSpec spec = ls_spec({4, 3}, 6, {}, 1.0, 8);
  OnlineProblem a(spec, 7), b(spec, 7), c(spec, 8);
  testutil::Rng rng(3);
  const DenseTensor w = testutil::random_tensor(rng, {4, 3});
  bool any_diff_seed = false;
  for (std::size_t t = 1; t <= 6; ++t) {
    auto [fa, ga] = a.loss_and_grad(t, w);
    auto [fb, gb] = b.loss_and_grad(t, w);
    CHECK(bits_equal(fa, fb));
    for (std::size_t i = 0; i < ga.size(); ++i)
      CHECK(bits_equal(ga[i], gb[i]));
    if (!bits_equal(fa, c.loss(t, w))) any_diff_seed = true;
  }
  CHECK(any_diff_seed);
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != c.fingerprint());
}

TEST_CASE("rank-(1,1) least squares emits outer-product gradients") {
  OnlineProblem p(ls_spec({5, 4}, 8, {1, 1}), 11);
  testutil::Rng rng(5);
  const DenseTensor w = testutil::random_tensor(rng, {5, 4});
  for (std::size_t t = 1; t <= 8; ++t) {
    auto [f, g] = p.loss_and_grad(t, w);
    // sigma_2 <= 1e-10 * sigma_1 in both matricizations.
    CHECK(numerical_mode_rank(g, 0) <= 1);
    CHECK(numerical_mode_rank(g, 1) <= 1);
    CHECK(g.frobenius_norm() > 0.0);
  }
}

TEST_CASE("declared mode ranks certify on every emitted gradient") {
  ProblemSpec spec;
  spec.family = LossFamily::tensor_regression;
  spec.shape = {3, 4, 2};
  spec.mode_ranks = {1, 2, 1};
  spec.horizon = 6;
  spec.batch = 5;
  OnlineProblem p(spec, 23);
  testutil::Rng rng(9);
  const DenseTensor w = testutil::random_tensor(rng, {3, 4, 2});
  for (std::size_t t = 1; t <= 6; ++t) {
    auto [f, g] = p.loss_and_grad(t, w);
    for (std::size_t mode = 0; mode < 3; ++mode)
      CHECK(numerical_mode_rank(g, mode) <= spec.mode_ranks[mode]);
  }
  const auto bounds = p.mode_rank_bounds();
  CHECK(bounds == std::vector<std::size_t>{1, 2, 1});
  CHECK(p.rank_bound() == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
}

TEST_CASE("conditioning control: Hessian eigenvalue ratio equals cond") {
  // The per-step Hessian in matrix form is M = (1/b) X^T X; gradients are
  // M (W - planted), so columns of M are recovered by probing with unit
  // perturbations of the planted parameter.
  const std::size_t m = 4, n = 3, r = 3;
  OnlineProblem p(ls_spec({m, n}, 2, {r, r}, 100.0), 31);
  const DenseTensor& w0 = p.planted();
  SymMatrix hess(m);
  for (std::size_t col = 0; col < m; ++col) {
    DenseTensor w = w0;
    w.at({col, 0}) += 1.0;
    auto [f, g] = p.loss_and_grad(1, w);
    for (std::size_t row = 0; row <= col; ++row)
      hess.set(row, col, g.at({row, 0}));
  }
  const EigenPair e = sym_eig(hess);
  CHECK(e.eigenvalues[0] / e.eigenvalues[r - 1] ==
        doctest::Approx(100.0).epsilon(1e-8));
  // Rank-3 design in a 4-dimensional mode: the fourth eigenvalue vanishes.
  CHECK(std::abs(e.eigenvalues[m - 1]) <= 1e-10 * e.eigenvalues[0]);
}

TEST_CASE("noiseless losses vanish exactly at the planted parameter") {
  OnlineProblem ls(ls_spec({4, 3}, 5), 3);
  for (std::size_t t = 1; t <= 5; ++t) {
    auto [f, g] = ls.loss_and_grad(t, ls.planted());
    CHECK(f == 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == 0.0);
  }
  ProblemSpec spec;
  spec.family = LossFamily::tensor_regression;
  spec.shape = {3, 2, 2};
  spec.horizon = 4;
  spec.batch = 6;
  OnlineProblem tr(spec, 3);
  for (std::size_t t = 1; t <= 4; ++t) {
    auto [f, g] = tr.loss_and_grad(t, tr.planted());
    CHECK(f == 0.0);
    CHECK(g.frobenius_norm() == 0.0);
  }
  auto peek_logistic_planted = [] {
    ProblemSpec s;
    s.family = LossFamily::multiclass_logistic;
    s.shape = {3, 4};
    s.horizon = 2;
    s.batch = 4;
    return OnlineProblem(s, 1).planted();
  };
  CHECK_THROWS_AS(peek_logistic_planted(), std::logic_error);
}

TEST_CASE("gradients match central finite differences") {
  testutil::Rng rng(17);
  OnlineProblem ls(ls_spec({3, 4}, 3, {2, 2}, 5.0, 4), 2);
  check_gradient_fd(ls, 1, testutil::random_tensor(rng, {3, 4}));
  check_gradient_fd(ls, 3, testutil::random_tensor(rng, {3, 4}));

  ProblemSpec lg;
  lg.family = LossFamily::multiclass_logistic;
  lg.shape = {3, 5};
  lg.horizon = 3;
  lg.batch = 4;
  OnlineProblem logistic(lg, 2);
  check_gradient_fd(logistic, 1, testutil::random_tensor(rng, {3, 5}));
  check_gradient_fd(logistic, 2, testutil::random_tensor(rng, {3, 5}));

  ProblemSpec tr;
  tr.family = LossFamily::tensor_regression;
  tr.shape = {2, 3, 2};
  tr.mode_ranks = {2, 2, 1};
  tr.horizon = 3;
  tr.batch = 4;
  OnlineProblem tensor(tr, 2);
  check_gradient_fd(tensor, 2, testutil::random_tensor(rng, {2, 3, 2}));
}

TEST_CASE("losses are convex along random chords") {
  testutil::Rng rng(29);
  auto probe = [&](const OnlineProblem& p) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t t = 1 + rng.index(p.horizon());
      const DenseTensor a = testutil::random_tensor(rng, p.shape());
      const DenseTensor b = testutil::random_tensor(rng, p.shape());
      const double theta = rng.uniform();
      DenseTensor mid(p.shape());
      for (std::size_t i = 0; i < mid.size(); ++i)
        mid[i] = theta * a[i] + (1.0 - theta) * b[i];
      CHECK(p.loss(t, mid) <=
            theta * p.loss(t, a) + (1.0 - theta) * p.loss(t, b) + 1e-9);
    }
  };
  probe(OnlineProblem(ls_spec({3, 4}, 4, {}, 1.0, 4), 41));
  ProblemSpec lg;
  lg.family = LossFamily::multiclass_logistic;
  lg.shape = {4, 3};
  lg.horizon = 4;
  lg.batch = 4;
  probe(OnlineProblem(lg, 41));
  ProblemSpec tr;
  tr.family = LossFamily::tensor_regression;
  tr.shape = {2, 2, 3};
  tr.horizon = 4;
  tr.batch = 4;
  probe(OnlineProblem(tr, 41));
}

TEST_CASE("offline solve recovers planted least-squares parameters") {
  OnlineProblem p(ls_spec({4, 3}, 20, {3, 3}, 4.0), 13);
  const Comparator cmp = p.solve_offline();
  CHECK(testutil::rel_diff(cmp.w_star.values(), p.planted().values()) <= 1e-8);
  CHECK(std::abs(cmp.offline_objective) <= 1e-16);
  CHECK(cmp.problem_fingerprint == p.fingerprint());
  CHECK(cmp.d == 0.0);
  CHECK(cmp.d_inf == 0.0);
}

TEST_CASE("single-step full-rank quadratic is minimized at its center") {
  // With r = m = batch-rank the step loss is exactly (1/2)||W - planted||^2,
  // so the offline minimizer is the center itself, even at T = 1.
  OnlineProblem p(ls_spec({3, 3}, 1, {3, 3}, 1.0, 4), 19);
  const Comparator cmp = p.solve_offline();
  CHECK(testutil::rel_diff(cmp.w_star.values(), p.planted().values()) <= 1e-9);
}

TEST_CASE("offline solutions minimize: no perturbation does better") {
  testutil::Rng rng(59);
  auto total = [](const OnlineProblem& p, const DenseTensor& w) {
    double f = 0.0;
    for (std::size_t t = 1; t <= p.horizon(); ++t) f += p.loss(t, w);
    return f;
  };
  // Rank-deficient least squares: the normal equations are singular and the
  // pseudoinverse picks a minimizer; check nothing nearby is lower.
  OnlineProblem ls(ls_spec({5, 3}, 2, {2, 2}), 61);
  const Comparator ls_cmp = ls.solve_offline();
  for (int trial = 0; trial < 10; ++trial) {
    DenseTensor w = ls_cmp.w_star;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += 0.1 * rng.normal();
    CHECK(total(ls, ls_cmp.w_star) <= total(ls, w) + 1e-9);
  }
  ProblemSpec tr;
  tr.family = LossFamily::tensor_regression;
  tr.shape = {2, 3, 2};
  tr.mode_ranks = {1, 1, 1};
  tr.horizon = 3;
  tr.batch = 3;
  OnlineProblem tensor(tr, 67);
  const Comparator tr_cmp = tensor.solve_offline();
  CHECK(std::abs(tr_cmp.offline_objective) <= 1e-12);
  for (int trial = 0; trial < 10; ++trial) {
    DenseTensor w = tr_cmp.w_star;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += 0.1 * rng.normal();
    CHECK(tr_cmp.offline_objective <= total(tensor, w) + 1e-9);
  }
}

TEST_CASE("logistic offline solve converges to a certified stationary point") {
  ProblemSpec spec;
  spec.family = LossFamily::multiclass_logistic;
  spec.shape = {3, 4};
  spec.horizon = 10;
  spec.batch = 4;
  OnlineProblem p(spec, 71);
  const Comparator cmp = p.solve_offline();
  // Stationarity of the mean objective at the reported solution.
  DenseTensor grad_sum(spec.shape);
  for (std::size_t t = 1; t <= spec.horizon; ++t) {
    auto [f, g] = p.loss_and_grad(t, cmp.w_star);
    for (std::size_t i = 0; i < g.size(); ++i) grad_sum[i] += g[i];
  }
  const double mean_grad_norm =
      grad_sum.frobenius_norm() / static_cast<double>(spec.horizon);
  CHECK(mean_grad_norm <= 1e-8);
  CHECK(cmp.offline_objective > 0.0);  // log-loss cannot reach zero
  // The ridge keeps the solution bounded.
  CHECK(cmp.w_star.frobenius_norm() < 100.0);
}

TEST_CASE("offline solve failure carries the final gradient norm") {
  ProblemSpec spec;
  spec.family = LossFamily::multiclass_logistic;
  spec.shape = {3, 4};
  spec.horizon = 5;
  spec.batch = 4;
  OnlineProblem p(spec, 3);
  OfflineSolveOptions opts;
  opts.max_iterations = 2;
  try {
    p.solve_offline(opts);
    FAIL("expected non-convergence");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("gradient norm") != std::string::npos);
  }
}

TEST_CASE("logistic loss at zero weights is log(classes)") {
  ProblemSpec spec;
  spec.family = LossFamily::multiclass_logistic;
  spec.shape = {4, 6};
  spec.horizon = 3;
  spec.batch = 5;
  OnlineProblem p(spec, 5);
  const DenseTensor zero(spec.shape);
  for (std::size_t t = 1; t <= 3; ++t)
    CHECK(p.loss(t, zero) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("default rank bounds fill in family-specific maxima") {
  OnlineProblem ls(ls_spec({8, 5}, 1, {}, 1.0, 16), 1);
  CHECK(ls.mode_rank_bounds() == std::vector<std::size_t>{5, 5});
  CHECK(ls.rank_bound() == doctest::Approx(5.0).epsilon(1e-12));

  OnlineProblem narrow(ls_spec({8, 5}, 1, {}, 1.0, 3), 1);
  CHECK(narrow.mode_rank_bounds() == std::vector<std::size_t>{3, 3});

  ProblemSpec tr;
  tr.family = LossFamily::tensor_regression;
  tr.shape = {4, 3, 3};
  tr.horizon = 1;
  tr.batch = 4;
  OnlineProblem tensor(tr, 1);
  CHECK(tensor.mode_rank_bounds() == std::vector<std::size_t>{4, 3, 3});
  CHECK(tensor.rank_bound() == doctest::Approx(std::cbrt(36.0)).epsilon(1e-12));
}

TEST_CASE("step indices outside the horizon are rejected") {
  OnlineProblem p(ls_spec({3, 3}, 4), 1);
  const DenseTensor w({3, 3});
  CHECK_THROWS_AS(p.loss(0, w), std::out_of_range);
  CHECK_THROWS_AS(p.loss(5, w), std::out_of_range);
  CHECK_THROWS_AS(p.loss_and_grad(5, w), std::out_of_range);
  CHECK_NOTHROW(p.loss(4, w));
  CHECK_THROWS_AS(p.loss(1, DenseTensor({3, 4})), std::invalid_argument);
}

TEST_CASE("zero-horizon problems still produce a comparator") {
  OnlineProblem p(ls_spec({3, 4}, 0), 1);
  const Comparator cmp = p.solve_offline();
  CHECK(cmp.w_star.shape() == std::vector<std::size_t>{3, 4});
  CHECK(cmp.w_star.frobenius_norm() == 0.0);
  CHECK(cmp.offline_objective == 0.0);
  const DenseTensor w({3, 4});
  CHECK_THROWS_AS(p.loss(1, w), std::out_of_range);
}

TEST_CASE("tensor regression recovery once measurements span the space") {
  ProblemSpec spec;
  spec.family = LossFamily::tensor_regression;
  spec.shape = {3, 4, 2};
  spec.horizon = 40;
  spec.batch = 8;
  OnlineProblem p(spec, 83);
  const Comparator cmp = p.solve_offline();
  CHECK(testutil::rel_diff(cmp.w_star.values(), p.planted().values()) <= 1e-6);
  CHECK(std::abs(cmp.offline_objective) <= 1e-10);
}

}  // TEST_SUITE
