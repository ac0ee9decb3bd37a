#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cylev {

// SplitMix64 finalizer; bijective with full avalanche.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Order-sensitive combine of two 64-bit tokens.
inline constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(a ^ (splitmix64(b) + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2)));
}

// Child seed for replication r of a master seed.
inline constexpr std::uint64_t derived_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master, index);
}

// Stream purposes keep draws for unrelated roles in disjoint counter spaces.
enum class StreamPurpose : std::uint64_t {
  WienerIncrement = 1,
  PoissonClock = 2,
  JumpCoordinate = 3,
  StableIncrement = 4,
  OrthonormalFixture = 5,
  Direction = 6,
  Generic = 7,
};

inline constexpr std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t coordinate) noexcept {
  return (static_cast<std::uint64_t>(purpose) << 48) | (coordinate & 0xFFFFFFFFFFFFULL);
}

// Philox 4x32-10 counter-based generator (Salmon et al., SC 2011).
// The key is the seed; the stream id occupies the high counter words, so
// distinct (seed, stream) pairs index provably disjoint random sequences
// regardless of how work is scheduled across threads.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  CounterEngine(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  CounterEngine(std::uint64_t seed, StreamPurpose purpose, std::uint64_t coordinate) noexcept
      : CounterEngine(seed, stream_id(purpose, coordinate)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (sub_ == 0) {
      block_ = philox_block(block_index_++);
    }
    const std::uint32_t lo = block_[2 * sub_];
    const std::uint32_t hi = block_[2 * sub_ + 1];
    sub_ = (sub_ + 1) % 2;
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
  }

  // Jump directly to 64-bit word `n` of the stream; random access is what
  // makes per-(replication, coordinate) reproducibility schedule-free.
  void seek(std::uint64_t n) noexcept {
    block_index_ = n / 2;
    sub_ = 0;
    if (n % 2 != 0) {
      block_ = philox_block(block_index_++);
      sub_ = 1;
    }
  }

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

  double exponential(double rate) {
    if (!(rate > 0.0)) {
      throw std::invalid_argument("exponential: rate must be positive");
    }
    return -std::log(uniform()) / rate;
  }

  // Symmetric alpha-stable variate, unit scale, via Chambers-Mallows-Stuck.
  // The beta = 0 form is continuous in alpha; at alpha = 1 both exponents
  // vanish and the expression reduces to tan(V).
  double stable_symmetric(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
      throw std::invalid_argument("stable_symmetric: alpha must lie in (0, 2)");
    }
    const double v = std::numbers::pi * (uniform() - 0.5);
    const double w = -std::log(uniform());
    if (alpha == 1.0) {
      return std::tan(v);
    }
    const double t = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha);
    const double s = std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
    return t * s;
  }

 private:
  std::array<std::uint32_t, 4> philox_block(std::uint64_t index) const noexcept {
    std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(index),
        static_cast<std::uint32_t>(index >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32),
    };
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMultA) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMultB) * ctr[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeylA;
      key[1] += kWeylB;
    }
    return ctr;
  }

  static constexpr std::uint32_t kMultA = 0xD2511F53u;
  static constexpr std::uint32_t kMultB = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_ = 0;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int sub_ = 0;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace cylev
