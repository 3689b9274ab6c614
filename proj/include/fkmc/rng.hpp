#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fkmc {

// Counter-based random stream (Philox4x32-10). A stream is addressed by
// (seed, stream_id); draws within a stream are addressed by a block counter.
// Identical (seed, stream_id) reproduces bit-identical sequences regardless
// of how many other streams are consumed concurrently, which is what makes
// per-path streams safe under any worker count.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id, bool negate_normals = false)
      : seed_(seed), stream_(stream_id), negate_(negate_normals) {}

  // Uniform on (0,1), 53-bit resolution.
  double uniform() {
    const std::uint32_t a = next_u32();
    const std::uint32_t b = next_u32();
    const std::uint64_t u53 = (static_cast<std::uint64_t>(a >> 6) << 27) | (b >> 5);
    return (static_cast<double>(u53) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (second value cached).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return negate_ ? -cached_ : cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * 3.14159265358979323846 * u2;
    cached_ = rad * std::sin(ang);
    have_cached_ = true;
    const double z = rad * std::cos(ang);
    return negate_ ? -z : z;
  }

  std::uint64_t stream_id() const { return stream_; }

 private:
  std::uint32_t next_u32() {
    if (idx_ == 4) {
      block_fill();
      idx_ = 0;
    }
    return buf_[idx_++];
  }

  void block_fill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(block_);
    std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
    std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
    std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ULL * c0;
      const std::uint64_t p1 = 0xCD9E8D57ULL * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0;
      c1 = n1;
      c2 = n2;
      c3 = n3;
      k0 += 0x9E3779B9U;
      k1 += 0xBB67AE85U;
    }
    buf_ = {c0, c1, c2, c3};
    ++block_;
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  bool negate_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int idx_ = 4;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace fkmc
