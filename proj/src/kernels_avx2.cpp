#include "kernels_tables.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

// No FMA in this file: elementwise kernels round each multiply and add
// separately, exactly like the scalar lane, so results stay bit-identical.

namespace shampoo::kernels::detail {
namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(s, s);
  return _mm_cvtsd_f64(_mm_add_sd(s, sh));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d yv = _mm256_loadu_pd(y + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(xv, yv));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

double sumsq_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(xv, xv));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) sum += x[i] * x[i];
  return sum;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    __m256d xv = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(av, xv)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_copy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = a * x[i];
}

void ewma_avx2(double alpha, const double* g, double* m, std::size_t n) {
  const double beta = 1.0 - alpha;
  const __m256d av = _mm256_set1_pd(alpha);
  const __m256d bv = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mv = _mm256_loadu_pd(m + i);
    __m256d gv = _mm256_loadu_pd(g + i);
    _mm256_storeu_pd(
        m + i, _mm256_add_pd(_mm256_mul_pd(av, mv), _mm256_mul_pd(bv, gv)));
  }
  for (; i < n; ++i) m[i] = alpha * m[i] + beta * g[i];
}

void rot_avx2(double c, double s, double* x, double* y, std::size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d yv = _mm256_loadu_pd(y + i);
    __m256d xn = _mm256_sub_pd(_mm256_mul_pd(cv, xv), _mm256_mul_pd(sv, yv));
    __m256d yn = _mm256_add_pd(_mm256_mul_pd(sv, xv), _mm256_mul_pd(cv, yv));
    _mm256_storeu_pd(x + i, xn);
    _mm256_storeu_pd(y + i, yn);
  }
  for (; i < n; ++i) {
    const double xi = c * x[i] - s * y[i];
    const double yi = s * x[i] + c * y[i];
    x[i] = xi;
    y[i] = yi;
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{dot_avx2,        sumsq_avx2, axpy_avx2,
                             scale_copy_avx2, ewma_avx2,  rot_avx2};
  return t;
}

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2") != 0; }

}  // namespace shampoo::kernels::detail

#endif
