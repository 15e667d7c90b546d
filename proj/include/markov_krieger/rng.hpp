// Counter-based deterministic random numbers. Every variate is a pure
// function of (seed, stream, counter), so trajectory i / coordinate n can be
// generated in any order, in parallel, with bit-identical results across
// runs and platforms (integer mixing only; the double mapping uses the top
// 53 bits). This is what makes the statistical probes reproducible.
#pragma once

#include <cstdint>

namespace mk {

// splitmix64 finalizer: a well-mixed 64 -> 64 bijection.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
    // Feistel-free triple mix: each argument passes through the bijection
    // before combining, so low-entropy (seed, stream, counter) triples land
    // far apart.
    return mix64(mix64(mix64(seed_) ^ stream) ^ counter);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform(std::uint64_t stream, std::uint64_t counter) const {
    return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace mk
