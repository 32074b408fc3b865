#include "advfeat/rng.hpp"

#include <cmath>

namespace advfeat {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double Rng::gaussian() {
  // Polar rejection; consumes a deterministic number of draws per stream.
  for (;;) {
    double a = 2.0 * uniform01() - 1.0;
    double b = 2.0 * uniform01() - 1.0;
    double s = a * a + b * b;
    if (s > 0.0 && s < 1.0) {
      return a * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

double Rng::rademacher() { return (next_u64() & 1u) ? 1.0 : -1.0; }

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection-free modulo is biased for huge n; all callers use small n.
  return next_u64() % n;
}

Rng Rng::fork(std::string_view tag) const {
  std::uint64_t s = state_ ^ fnv1a(tag);
  return Rng(splitmix64(s));
}

Rng Rng::fork(std::string_view tag, std::uint64_t index) const {
  std::uint64_t s = state_ ^ fnv1a(tag);
  s ^= 0x9e3779b97f4a7c15ULL * (index + 1);
  return Rng(splitmix64(s));
}

}  // namespace advfeat
