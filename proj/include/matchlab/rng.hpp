#pragma once

#include <cstdint>

namespace matchlab {

// SplitMix64 (Steele, Lea & Vigna; public domain reference constants).
// Chosen over std::mt19937 because the whole algorithm fits in a dozen
// lines and can be re-implemented bit-for-bit in any language, which is
// what makes the generated golden instances portable.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) using the top 53 bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n). Plain modulo reduction, kept deliberately
  // simple so the recipe is easy to restate; the tiny bias is irrelevant
  // for instance generation and the behavior is part of the file contract.
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

}  // namespace matchlab
