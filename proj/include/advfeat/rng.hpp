#pragma once

#include <cstdint>
#include <string_view>

namespace advfeat {

// Seedable, splittable counter-style generator (SplitMix64 core).  Every
// dataset, attack, and training run draws from its own stream forked off a
// root seed by a purpose tag, so a whole experiment is bitwise reproducible
// from one integer.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // 53-bit uniform in [0, 1).
  double uniform01();
  double uniform(double lo, double hi);
  // Standard normal via the Marsaglia polar method.
  double gaussian();
  // Exactly +1 or -1.
  double rademacher();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Independent child stream; does not advance this stream.
  Rng fork(std::string_view tag) const;
  Rng fork(std::string_view tag, std::uint64_t index) const;

 private:
  std::uint64_t state_;
};

}  // namespace advfeat
