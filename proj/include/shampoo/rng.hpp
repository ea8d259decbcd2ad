#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace shampoo {

// Deterministic scalar RNG. Only the mt19937_64 bit stream is relied upon;
// uniform/normal mappings are spelled out here because the standard library's
// distribution algorithms are implementation-defined and would break
// bit-reproducibility of generated problems across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; two fresh uniforms per draw, no cached
  // spare, so the consumed stream length is predictable.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in [0, n); modulo bias is negligible for desk-scale n.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(gen_() % n);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace shampoo
