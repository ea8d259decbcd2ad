#include "shampoo/psd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "shampoo/kernels.hpp"

namespace shampoo {

namespace {

double offdiag_norm(const std::vector<double>& b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) acc += b[p * n + q] * b[p * n + q];
  return std::sqrt(2.0 * acc);
}

// U diag(f) U^T, built over the lower triangle and mirrored so the result is
// exactly symmetric.
SymMatrix rebuild_scaled(const DenseMatrix& u, const std::vector<double>& f) {
  const std::size_t n = u.rows();
  DenseMatrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w(i, j) = u(i, j) * f[j];
  SymMatrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      c.set(i, j, kernels::dot(w.row(i), u.row(j), n));
  return c;
}

// Clamp threshold and rejection threshold shared by the power/trace maps.
struct SpectrumClamp {
  double tau;
  double neg_tol;
};

SpectrumClamp clamp_for(const std::vector<double>& eigenvalues) {
  double lam_max = 0.0;
  double radius = 0.0;
  for (double lam : eigenvalues) {
    lam_max = std::max(lam_max, lam);
    radius = std::max(radius, std::abs(lam));
  }
  return {1e-12 * std::max(lam_max, 1.0), 1e-8 * std::max(1.0, radius)};
}

double powered_eigenvalue(double lam, double alpha, const SpectrumClamp& c,
                          std::size_t index) {
  if (lam < -c.neg_tol) {
    if (alpha < 0)
      throw std::domain_error(
          "matrix_power: negative exponent on a singular/indefinite matrix: "
          "eigenvalue[" +
          std::to_string(index) + "] = " + std::to_string(lam));
    throw std::domain_error("matrix_power: input not PSD within tolerance: "
                            "eigenvalue[" +
                            std::to_string(index) + "] = " +
                            std::to_string(lam));
  }
  if (lam < c.tau) lam = alpha < 0 ? c.tau : 0.0;
  return std::pow(lam, alpha);
}

}  // namespace

EigenPair sym_eig(const SymMatrix& a) {
  const std::size_t n = a.dim();
  for (double v : a.values())
    if (!std::isfinite(v))
      throw std::invalid_argument("sym_eig: non-finite entry in input");

  std::vector<double> b = a.values();
  // Accumulated rotations, kept transposed (row i is eigenvector i) so that
  // Jacobi updates touch contiguous rows.
  std::vector<double> vt(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) vt[i * n + i] = 1.0;

  const double norm_a = std::sqrt(kernels::sumsq(b.data(), b.size()));
  if (n > 1 && norm_a > 0.0) {
    const double stop = 1e-14 * norm_a;
    // Rotating on pivots already inside the convergence budget only recycles
    // roundoff through degenerate eigenvalue clusters (each such rotation is
    // ~45 degrees and smears eps-level noise across its two rows), which
    // degrades the tail of the iteration from quadratic to linear. Freezing
    // them keeps the final off-diagonal mass below `stop` regardless:
    // n(n-1)/2 skipped entries of size <= stop/n sum to < stop in norm.
    const double skip = stop / static_cast<double>(n);
    const int max_sweeps = 128;
    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      if (offdiag_norm(b, n) <= stop) {
        converged = true;
        break;
      }
      for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const double apq = b[p * n + q];
          if (std::abs(apq) <= skip) continue;
          const double app = b[p * n + p];
          const double aqq = b[q * n + q];
          const double theta = (aqq - app) / (2.0 * apq);
          double t;
          if (std::abs(theta) > 1e150) {
            t = 1.0 / (2.0 * theta);
          } else {
            t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
            if (theta < 0.0) t = -t;
          }
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          kernels::rot(c, s, &b[p * n], &b[q * n], n);
          // The rotated rows give the new columns by symmetry; the 2x2 pivot
          // block has exact closed forms.
          b[p * n + p] = app - t * apq;
          b[q * n + q] = aqq + t * apq;
          b[p * n + q] = 0.0;
          b[q * n + p] = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            if (i == p || i == q) continue;
            b[i * n + p] = b[p * n + i];
            b[i * n + q] = b[q * n + i];
          }
          kernels::rot(c, s, &vt[p * n], &vt[q * n], n);
        }
      }
    }
    if (!converged && offdiag_norm(b, n) > stop)
      throw std::runtime_error("sym_eig: Jacobi sweeps failed to converge");
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t i, std::size_t j) {
    return b[i * n + i] > b[j * n + j];
  });

  EigenPair e;
  e.eigenvalues.resize(n);
  e.eigenvectors = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    e.eigenvalues[j] = b[perm[j] * n + perm[j]];
    for (std::size_t i = 0; i < n; ++i)
      e.eigenvectors(i, j) = vt[perm[j] * n + i];
  }
  return e;
}

SymMatrix reconstruct(const EigenPair& e) {
  return rebuild_scaled(e.eigenvectors, e.eigenvalues);
}

SymMatrix matrix_power(const SymMatrix& a, double alpha) {
  const EigenPair e = sym_eig(a);
  const SpectrumClamp c = clamp_for(e.eigenvalues);
  std::vector<double> f(e.eigenvalues.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    f[i] = powered_eigenvalue(e.eigenvalues[i], alpha, c, i);
  return rebuild_scaled(e.eigenvectors, f);
}

std::vector<double> diag_power(const std::vector<double>& d, double alpha) {
  const SpectrumClamp c = clamp_for(d);
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    out[i] = powered_eigenvalue(d[i], alpha, c, i);
  return out;
}

double trace_power(const SymMatrix& a, double alpha) {
  const EigenPair e = sym_eig(a);
  const SpectrumClamp c = clamp_for(e.eigenvalues);
  double acc = 0.0;
  for (std::size_t i = 0; i < e.eigenvalues.size(); ++i)
    acc += powered_eigenvalue(e.eigenvalues[i], alpha, c, i);
  return acc;
}

double trace_power(const std::vector<double>& d, double alpha) {
  const SpectrumClamp c = clamp_for(d);
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    acc += powered_eigenvalue(d[i], alpha, c, i);
  return acc;
}

double loewner_slack(const SymMatrix& a, const SymMatrix& b) {
  const SymMatrix d = a - b;  // dim check happens here
  const EigenPair e = sym_eig(d);
  if (e.eigenvalues.empty()) return 0.0;
  const double radius =
      std::max(std::abs(e.eigenvalues.front()), std::abs(e.eigenvalues.back()));
  return e.eigenvalues.back() / std::max(1.0, radius);
}

bool loewner_geq(const SymMatrix& a, const SymMatrix& b, double tol) {
  return loewner_slack(a, b) >= -tol;
}

}  // namespace shampoo
