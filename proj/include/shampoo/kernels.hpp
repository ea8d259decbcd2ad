#pragma once

#include <cstddef>
#include <vector>

namespace shampoo::kernels {

// A lane is one implementation of the primitive kernels. The scalar lane is
// the reference; SIMD lanes must agree with it bit-for-bit on elementwise
// kernels (axpy, scale_copy, ewma, rot) and to rounding on reductions
// (dot, sumsq), whose summation order is lane-specific. No kernel uses FMA.
enum class Lane { scalar, avx2, neon };

const char* lane_name(Lane lane);
std::vector<Lane> supported_lanes();
Lane best_supported_lane();
Lane active_lane();
void set_lane(Lane lane);  // throws std::invalid_argument if unsupported here

// y . x
double dot(const double* x, const double* y, std::size_t n);
// sum x_i^2
double sumsq(const double* x, std::size_t n);
// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);
// y = a * x
void scale_copy(double a, const double* x, double* y, std::size_t n);
// m = alpha * m + (1 - alpha) * g
void ewma(double alpha, const double* g, double* m, std::size_t n);
// plane rotation: (x, y) <- (c*x - s*y, s*x + c*y)
void rot(double c, double s, double* x, double* y, std::size_t n);

namespace detail {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale_copy)(double, const double*, double*, std::size_t);
  void (*ewma)(double, const double*, double*, std::size_t);
  void (*rot)(double, double, double*, double*, std::size_t);
};

// Table for a specific lane, for equivalence tests. Throws if the lane is
// not compiled in or not supported by the running CPU.
const KernelTable& table(Lane lane);

}  // namespace detail

}  // namespace shampoo::kernels
