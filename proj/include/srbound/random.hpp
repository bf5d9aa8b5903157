#pragma once

#include <cstdint>
#include <limits>

namespace srb {

// SplitMix64 (Steele, Lea, Flood). Small state, so one generator per DAG
// node is affordable, and the output does not depend on the standard library.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

constexpr std::uint64_t mix64(std::uint64_t x) noexcept { return SplitMix64(x)(); }

// Independent stream for (seed, key), e.g. (trial seed, node id).
constexpr SplitMix64 substream(std::uint64_t seed, std::uint64_t key) noexcept {
  return SplitMix64(mix64(seed) ^ mix64(key + 0x632be59bd9b4e019ULL));
}

// Uniform double in [0, 1) with 53 random bits.
template <class Gen>
double uniform01(Gen& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace srb
