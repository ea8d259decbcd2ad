#include <bit>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "shampoo/shampoo.hpp"

namespace shampoo {
namespace {

constexpr std::uint8_t kMagic[4] = {'S', 'H', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const std::uint8_t* p, std::size_t n) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (b != 0 && a > std::numeric_limits<std::uint64_t>::max() / b)
    throw std::runtime_error("checkpoint shape overflows");
  return a * b;
}

// All multi-byte fields are little-endian regardless of host order.
struct Writer {
  std::vector<std::uint8_t> bytes;

  void u8(std::uint8_t v) { bytes.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
      bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
      bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) f64(p[i]);
  }
};

struct Reader {
  const std::uint8_t* p;
  std::size_t n;
  std::size_t pos = 0;

  void need(std::size_t k) const {
    if (n - pos < k) throw std::runtime_error("checkpoint truncated");
  }
  // count items of item_size bytes each, overflow-safe.
  void need_items(std::uint64_t count, std::size_t item_size) const {
    if (count > (n - pos) / item_size)
      throw std::runtime_error("checkpoint truncated");
  }
  std::uint8_t u8() {
    need(1);
    return p[pos++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(p[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> f64s(std::uint64_t count) {
    need_items(count, 8);
    std::vector<double> out(count);
    for (std::uint64_t i = 0; i < count; ++i) out[i] = f64();
    return out;
  }
};

ModeVariant variant_from_byte(std::uint8_t b) {
  if (b == 0) return ModeVariant::full;
  if (b == 1) return ModeVariant::diagonal;
  throw std::runtime_error("checkpoint mode variant byte is invalid: " +
                           std::to_string(static_cast<unsigned>(b)));
}

}  // namespace

std::vector<std::uint8_t> ShampooOptimizer::serialize() const {
  Writer w;
  for (std::uint8_t c : kMagic) w.u8(c);
  w.u32(kVersion);

  w.f64(config_.learning_rate);
  w.f64(config_.epsilon);
  w.f64(config_.momentum);
  w.u64(config_.root_update_interval);
  w.u64(config_.diag_threshold);
  w.u8(config_.momentum_into_preconditioner ? 1 : 0);
  w.u64(config_.mode_overrides.size());
  for (const auto& [mode, variant] : config_.mode_overrides) {
    w.u64(mode);
    w.u8(static_cast<std::uint8_t>(variant));
  }

  const std::size_t k = order();
  w.u64(k);
  for (std::size_t i = 0; i < k; ++i) w.u64(params_.extent(i));
  for (const ModeState& m : modes_)
    w.u8(static_cast<std::uint8_t>(m.variant));

  w.u64(step_count_);
  w.u64(last_root_step_);
  w.f64s(params_.data(), params_.size());
  w.f64s(momentum_.data(), momentum_.size());
  for (const ModeState& m : modes_) {
    if (m.variant == ModeVariant::full) {
      w.f64s(m.stat.data(), m.stat.size());
      w.f64s(m.root.data(), m.root.size());
    } else {
      w.f64s(m.diag_stat.data(), m.diag_stat.size());
      w.f64s(m.diag_root.data(), m.diag_root.size());
    }
  }

  w.u64(fnv1a(w.bytes.data(), w.bytes.size()));
  return w.bytes;
}

ShampooOptimizer ShampooOptimizer::deserialize(
    const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes.data(), bytes.size()};
  for (std::uint8_t c : kMagic)
    if (r.u8() != c) throw std::runtime_error("not a shampoo checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version) + " (expected " +
                             std::to_string(kVersion) + ")");

  ShampooOptimizer opt;
  opt.config_.learning_rate = r.f64();
  opt.config_.epsilon = r.f64();
  opt.config_.momentum = r.f64();
  opt.config_.root_update_interval = r.u64();
  opt.config_.diag_threshold = r.u64();
  opt.config_.momentum_into_preconditioner = r.u8() != 0;
  const std::uint64_t n_overrides = r.u64();
  r.need_items(n_overrides, 9);
  for (std::uint64_t i = 0; i < n_overrides; ++i) {
    const std::uint64_t mode = r.u64();
    opt.config_.mode_overrides[mode] = variant_from_byte(r.u8());
  }
  opt.config_.validate();

  const std::uint64_t k = r.u64();
  if (k == 0) throw std::runtime_error("checkpoint records an order-0 tensor");
  r.need_items(k, 8);
  std::vector<std::size_t> shape(k);
  std::uint64_t total = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    shape[i] = r.u64();
    if (shape[i] == 0)
      throw std::runtime_error("checkpoint records a zero extent");
    total = checked_mul(total, shape[i]);
  }
  for (const auto& [mode, variant] : opt.config_.mode_overrides) {
    (void)variant;
    if (mode >= k)
      throw std::runtime_error(
          "checkpoint mode override refers to mode " + std::to_string(mode) +
          " of an order-" + std::to_string(k) + " tensor");
  }
  opt.modes_.resize(k);
  for (std::uint64_t i = 0; i < k; ++i)
    opt.modes_[i].variant = variant_from_byte(r.u8());

  opt.step_count_ = r.u64();
  opt.last_root_step_ = r.u64();
  opt.params_ = DenseTensor(shape, r.f64s(total));
  opt.momentum_ = DenseTensor(shape, r.f64s(total));
  for (std::uint64_t i = 0; i < k; ++i) {
    ModeState& m = opt.modes_[i];
    const std::uint64_t n_i = shape[i];
    if (m.variant == ModeVariant::full) {
      const std::uint64_t sq = checked_mul(n_i, n_i);
      m.stat = SymMatrix(n_i, r.f64s(sq));
      m.root = SymMatrix(n_i, r.f64s(sq));
    } else {
      m.diag_stat = r.f64s(n_i);
      m.diag_root = r.f64s(n_i);
    }
  }

  const std::size_t body_end = r.pos;
  const std::uint64_t stored = r.u64();
  if (r.pos != bytes.size())
    throw std::runtime_error("checkpoint has trailing bytes");
  if (stored != fnv1a(bytes.data(), body_end))
    throw std::runtime_error("checkpoint checksum mismatch");
  return opt;
}

}  // namespace shampoo
