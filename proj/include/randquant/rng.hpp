#pragma once

#include <cstdint>

namespace randquant {

namespace detail {

// SplitMix64 finalizer; full-avalanche mix of a 64-bit word.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

/// Derive an independent sub-seed from a base seed and a salt (e.g. a sweep
/// row index), so nested experiments do not share trial streams.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return detail::mix64(seed ^ detail::mix64(salt * detail::kGolden + 1));
}

/// Counter-based per-trial random stream: the state for (seed, stream) is a
/// hash of both, and each draw advances a SplitMix64 counter. Identical
/// (seed, stream) pairs replay identical draws no matter which thread runs
/// them or in what order, which is what makes parallel trial loops
/// reproducible.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t stream)
      : state_(detail::mix64(seed ^ detail::mix64((stream + 1) * detail::kGolden))) {}

  std::uint64_t next_u64() {
    state_ += detail::kGolden;
    return detail::mix64(state_);
  }

  /// Uniform double in [0,1) with a full 53-bit mantissa.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace randquant
