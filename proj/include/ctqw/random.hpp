#pragma once

#include <cstdint>
#include <random>

#include "ctqw/errors.hpp"

namespace ctqw {

/// SplitMix64 finalizer; used to spread seeds and derive independent sub-seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Sub-seed for stage `stage` of a run seeded with `seed`.
/// Stage numbers are fixed (see experiment.hpp), so adding a stage never shifts earlier ones.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stage) noexcept {
  return splitmix64(seed ^ splitmix64(stage + 1));
}

/// Seeded generator with distribution code of our own, so sequences are identical
/// across standard library implementations (std::uniform_*_distribution is not).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound); unbiased via rejection.
  std::uint64_t index(std::uint64_t bound) {
    if (bound == 0) throw InvalidArgument("Rng::index: bound must be positive");
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

private:
  std::mt19937_64 engine_;
};

} // namespace ctqw
