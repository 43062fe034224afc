#pragma once

#include <cstdint>

namespace bwbary {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Counter-based SplitMix64: the k-th output (k = 0, 1, ...) is
/// mix(key + (k + 1) * gamma), which equals the k-th output of the usual
/// sequential SplitMix64 seeded with `key`. Any element is reachable in O(1).
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t at(std::uint64_t counter) const noexcept {
    return splitmix64_mix(key_ + (counter + 1) * kGoldenGamma);
  }

  std::uint64_t next() noexcept { return at(counter_++); }

  /// Independent stream for draw `index`: keyed by the index-th output.
  constexpr CounterRng stream(std::uint64_t index) const noexcept { return CounterRng(at(index)); }

  /// (k + 1/2) * 2^-52 for the top 52 bits k: in (0, 1), symmetric about 1/2.
  double next_open_unit() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace bwbary
