#pragma once

// Counter-based random streams. A stream is a pure function of
// (master seed, trial index, step index) plus a draw counter, so a trial's
// result never depends on which worker ran it or in which order.

#include <cmath>
#include <cstdint>
#include <limits>

namespace drift {

namespace detail {

constexpr std::uint64_t fmix64(std::uint64_t k) noexcept {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

class StepRng {
 public:
  using result_type = std::uint64_t;

  constexpr StepRng(std::uint64_t seed, std::uint64_t trial,
                    std::uint64_t step) noexcept
      : key_(detail::fmix64(
            detail::fmix64(detail::fmix64(seed ^ 0x5851f42d4c957f2dULL) +
                           trial * detail::kGolden) ^
            (step + 0x2545f4914f6cdd1dULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  /// SplitMix64 output for the next counter value.
  constexpr result_type operator()() noexcept {
    std::uint64_t z = key_ + (++counter_) * detail::kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer on [0, bound). bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept {
    // Lemire's nearly-divisionless rejection method.
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  /// Number of failures before the first success of a Bernoulli(p) sequence.
  /// p >= 1 yields 0; p <= 0 yields the maximum value.
  std::uint64_t geometric(double p) noexcept {
    if (p >= 1.0) return 0;
    if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
    const double u = uniform01();
    const double k = std::floor(std::log1p(-u) / std::log1p(-p));
    if (!(k < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(k);
  }

  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace drift
