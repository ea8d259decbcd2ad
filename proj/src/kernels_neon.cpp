#include "kernels_tables.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

// No vfmaq here for the same reason the AVX2 lane avoids FMA: elementwise
// kernels must match the scalar lane bit-for-bit.

namespace shampoo::kernels::detail {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

double sumsq_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t xv = vld1q_f64(x + i);
    acc = vaddq_f64(acc, vmulq_f64(xv, xv));
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) sum += x[i] * x[i];
  return sum;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t yv = vld1q_f64(y + i);
    float64x2_t xv = vld1q_f64(x + i);
    vst1q_f64(y + i, vaddq_f64(yv, vmulq_f64(av, xv)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_copy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(av, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = a * x[i];
}

void ewma_neon(double alpha, const double* g, double* m, std::size_t n) {
  const double beta = 1.0 - alpha;
  const float64x2_t av = vdupq_n_f64(alpha);
  const float64x2_t bv = vdupq_n_f64(beta);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t mv = vld1q_f64(m + i);
    float64x2_t gv = vld1q_f64(g + i);
    vst1q_f64(m + i, vaddq_f64(vmulq_f64(av, mv), vmulq_f64(bv, gv)));
  }
  for (; i < n; ++i) m[i] = alpha * m[i] + beta * g[i];
}

void rot_neon(double c, double s, double* x, double* y, std::size_t n) {
  const float64x2_t cv = vdupq_n_f64(c);
  const float64x2_t sv = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t xv = vld1q_f64(x + i);
    float64x2_t yv = vld1q_f64(y + i);
    float64x2_t xn = vsubq_f64(vmulq_f64(cv, xv), vmulq_f64(sv, yv));
    float64x2_t yn = vaddq_f64(vmulq_f64(sv, xv), vmulq_f64(cv, yv));
    vst1q_f64(x + i, xn);
    vst1q_f64(y + i, yn);
  }
  for (; i < n; ++i) {
    const double xi = c * x[i] - s * y[i];
    const double yi = s * x[i] + c * y[i];
    x[i] = xi;
    y[i] = yi;
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable t{dot_neon,        sumsq_neon, axpy_neon,
                             scale_copy_neon, ewma_neon,  rot_neon};
  return t;
}

}  // namespace shampoo::kernels::detail

#endif
