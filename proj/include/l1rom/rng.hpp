#pragma once

#include <cstdint>
#include <random>

namespace l1rom {

/// Seeded generator with a platform-independent double mapping. The engine
/// sequence is pinned by the standard, so identical seeds give bit-identical
/// streams everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  std::uint64_t next_u64() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace l1rom
