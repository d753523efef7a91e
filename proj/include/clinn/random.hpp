#pragma once

#include <cstdint>

namespace clinn {

// splitmix64 (Steele, Lea, Flood; reference constants from Vigna's C code).
// Pinned so seeded sampling reproduces across languages.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) by modulo reduction; bound must be > 0.
  std::uint64_t Below(std::uint64_t bound) { return Next() % bound; }

  // Uniform double in [0, 1) from the top 53 bits.
  double Unit() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  bool Chance(double p) { return Unit() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace clinn
