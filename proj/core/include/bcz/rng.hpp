#pragma once

#include <cstdint>

namespace bcz {

// SplitMix64 finalizer (Steele-Lea-Flood constants).
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 run in counter mode: word k of stream `seed` is
/// mix(seed + (k+1)*gamma), identical to the sequential generator but
/// randomly addressable, so Monte-Carlo shards stay reproducible no
/// matter how work is divided between threads.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  /// Derives an independent stream key; used for per-chunk substreams.
  static std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64_mix(seed ^ splitmix64_mix(stream * kSplitMixGamma + 0xD1B54A32D192ED03ULL));
  }

  std::uint64_t next_u64() { return splitmix64_mix(seed_ + (++counter_) * kSplitMixGamma); }

  /// Uniform double in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Multiply-shift; bias is negligible for the n used here.
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace bcz
