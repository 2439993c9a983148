// Deterministic random number generation. Everything that randomizes in this
// project draws from Rng so that (config, seed) fully pins the run, bit for
// bit, independent of the standard library's distribution implementations.
#pragma once

#include <cmath>
#include <cstdint>

namespace padland {

// splitmix64, used to expand a user seed into generator state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// xoshiro256++ with explicit uniform/normal helpers.
class Rng {
 public:
  Rng() : Rng(0) {}

  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  // Derives an independent stream, e.g. one per environment worker or
  // evaluation run. Mixing the id through splitmix64 keeps streams decorrelated
  // even for consecutive ids.
  Rng fork(std::uint64_t streamId) const {
    std::uint64_t sm = state_[0] ^ (0xA0761D6478BD642Full * (streamId + 1));
    Rng child;
    for (auto& word : child.state_) word = splitmix64(sm);
    return child;
  }

  std::uint64_t nextU64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniformIndex(std::uint64_t n) { return n == 0 ? 0 : nextU64() % n; }

  // Box-Muller. The spare value is cached, so draw order matters for
  // reproducibility; keep all consumers single-threaded per Rng instance.
  double normal() {
    if (hasSpare_) {
      hasSpare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    hasSpare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4] = {1, 2, 3, 4};
  double spare_ = 0.0;
  bool hasSpare_ = false;
};

}  // namespace padland
