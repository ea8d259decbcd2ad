#include "kernels_tables.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace shampoo::kernels {

namespace {

bool lane_available(Lane lane) {
  switch (lane) {
    case Lane::scalar:
      return true;
    case Lane::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return detail::cpu_has_avx2();
#else
      return false;
#endif
    case Lane::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

// Initial lane: SHAMPOO_KERNEL_LANE env var if valid, else best supported.
Lane initial_lane() {
  Lane lane = best_supported_lane();
  const char* env = std::getenv("SHAMPOO_KERNEL_LANE");
  if (env != nullptr && *env != '\0') {
    bool known = false;
    for (Lane cand : {Lane::scalar, Lane::avx2, Lane::neon}) {
      if (std::strcmp(env, lane_name(cand)) == 0) {
        known = true;
        if (lane_available(cand)) {
          lane = cand;
        } else {
          std::fprintf(stderr,
                       "shampoo: SHAMPOO_KERNEL_LANE=%s not supported here, "
                       "using %s\n",
                       env, lane_name(lane));
        }
        break;
      }
    }
    if (!known)
      std::fprintf(stderr,
                   "shampoo: unknown SHAMPOO_KERNEL_LANE=%s, using %s\n", env,
                   lane_name(lane));
  }
  return lane;
}

std::atomic<Lane>& lane_slot() {
  static std::atomic<Lane> slot{initial_lane()};
  return slot;
}

const detail::KernelTable& active_table() {
  return detail::table(lane_slot().load(std::memory_order_relaxed));
}

}  // namespace

const char* lane_name(Lane lane) {
  switch (lane) {
    case Lane::scalar:
      return "scalar";
    case Lane::avx2:
      return "avx2";
    case Lane::neon:
      return "neon";
  }
  return "unknown";
}

std::vector<Lane> supported_lanes() {
  std::vector<Lane> lanes;
  for (Lane lane : {Lane::scalar, Lane::avx2, Lane::neon})
    if (lane_available(lane)) lanes.push_back(lane);
  return lanes;
}

Lane best_supported_lane() {
  if (lane_available(Lane::avx2)) return Lane::avx2;
  if (lane_available(Lane::neon)) return Lane::neon;
  return Lane::scalar;
}

Lane active_lane() { return lane_slot().load(std::memory_order_relaxed); }

void set_lane(Lane lane) {
  if (!lane_available(lane))
    throw std::invalid_argument(std::string("kernel lane not supported: ") +
                                lane_name(lane));
  lane_slot().store(lane, std::memory_order_relaxed);
}

double dot(const double* x, const double* y, std::size_t n) {
  return active_table().dot(x, y, n);
}

double sumsq(const double* x, std::size_t n) { return active_table().sumsq(x, n); }

void axpy(double a, const double* x, double* y, std::size_t n) {
  active_table().axpy(a, x, y, n);
}

void scale_copy(double a, const double* x, double* y, std::size_t n) {
  active_table().scale_copy(a, x, y, n);
}

void ewma(double alpha, const double* g, double* m, std::size_t n) {
  active_table().ewma(alpha, g, m, n);
}

void rot(double c, double s, double* x, double* y, std::size_t n) {
  active_table().rot(c, s, x, y, n);
}

namespace detail {

const KernelTable& table(Lane lane) {
  if (!lane_available(lane))
    throw std::invalid_argument(std::string("kernel lane not supported: ") +
                                lane_name(lane));
  switch (lane) {
    case Lane::scalar:
      return scalar_table();
    case Lane::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return avx2_table();
#else
      break;
#endif
    case Lane::neon:
#if defined(__aarch64__)
      return neon_table();
#else
      break;
#endif
  }
  throw std::invalid_argument("kernel lane not compiled in");
}

}  // namespace detail

}  // namespace shampoo::kernels
