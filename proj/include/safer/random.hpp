#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace safer {

/// SplitMix64 (Steele, Lea & Flood). State advances by 0x9E3779B97F4A7C15
/// and each output is the state passed through the finalizer
///
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z =  z ^ (z >> 31)
///
/// All arithmetic is modulo 2^64, so streams are identical on every platform.
/// Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by rejection on the top of the range.
  std::uint64_t bounded(std::uint64_t bound);

  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Independent stream seed for sub-task `index` of a run seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64::mix(SplitMix64::mix(seed ^ 0x6A09E667F3BCC909ULL) +
                         0x9E3779B97F4A7C15ULL * (index + 1));
}

}  // namespace safer
