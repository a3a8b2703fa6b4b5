#pragma once

#include <array>
#include <cstdint>

namespace grw::kernels {

// Philox4x32-10 counter-based generator. Stateless: every 128-bit counter /
// 64-bit key pair yields an independent 128-bit block, so parallel streams
// are just disjoint counter assignments (here: counter = {marble index,
// trajectory index}, key = user seed).
struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> c,
                                            std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k[0] += kWeyl0;
        k[1] += kWeyl1;
      }
      std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
      std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
      std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
  }
};

// uniform in (0,1] from the top 53 bits of a 64-bit word (never 0, log-safe)
inline double u53_open_closed(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1p-53;
}

// The two uniforms attached to marble `idx` of trajectory `traj`:
// first drives the hit time, second the branch choice.
inline void philox_pair(std::uint64_t seed, std::uint64_t traj,
                        std::uint64_t idx, double& u_time, double& u_branch) {
  auto r = Philox4x32::block(
      {static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32),
       static_cast<std::uint32_t>(traj), static_cast<std::uint32_t>(traj >> 32)},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  std::uint64_t w0 = r[0] | (static_cast<std::uint64_t>(r[1]) << 32);
  std::uint64_t w1 = r[2] | (static_cast<std::uint64_t>(r[3]) << 32);
  u_time = u53_open_closed(w0);
  u_branch = u53_open_closed(w1);
}

// Generic stream for non-marble consumers (optimizer restarts, model
// sampling): successive draws advance the counter's first word.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream_a,
               std::uint64_t stream_b = 0)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        base_{0,
              0,
              static_cast<std::uint32_t>(stream_a),
              static_cast<std::uint32_t>(stream_a >> 32)} {
    // fold the second stream id into the key side via a fixed xor; streams
    // remain disjoint counters for any (stream_a, stream_b) pair
    key_[0] ^= static_cast<std::uint32_t>(stream_b * 0x9E3779B97F4A7C15ull);
    key_[1] ^= static_cast<std::uint32_t>((stream_b * 0x9E3779B97F4A7C15ull) >> 32);
  }

  double uniform() {
    if (have_) {
      have_ = false;
      return u53_open_closed(spare_);
    }
    auto c = base_;
    c[0] = static_cast<std::uint32_t>(n_);
    c[1] = static_cast<std::uint32_t>(n_ >> 32);
    ++n_;
    auto r = Philox4x32::block(c, key_);
    spare_ = r[2] | (static_cast<std::uint64_t>(r[3]) << 32);
    have_ = true;
    return u53_open_closed(r[0] | (static_cast<std::uint64_t>(r[1]) << 32));
  }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller
  double normal();

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> base_;
  std::uint64_t n_ = 0;
  std::uint64_t spare_ = 0;
  bool have_ = false;
};

}  // namespace grw::kernels
