#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace arknls {

/// SplitMix64 (Steele, Lea, Flood 2014). Every random quantity in the library
/// comes from this generator so that a seed reproduces a run bit for bit on
/// any platform with IEEE doubles.
///
/// - uniform(): top 53 bits of the next output times 2^-53, in [0, 1).
/// - normal(): Box-Muller on two consecutive uniforms u1, u2, with
///   u1 mapped to (0, 1] as 1 - u1. The cosine branch is returned first and
///   the sine branch is cached for the following call.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Independent child stream; the parent advances by one step.
  SplitMix64 split() { return SplitMix64(next()); }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace arknls
