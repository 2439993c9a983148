// Brute-force GAE oracle: the O(n^2) double loop straight from the
// definition, A_t = sum_k (gamma*lambda)^k delta_{t+k}, truncated at episode
// boundaries, independent of the library's backward recursion.
#pragma once

#include <cstdint>
#include <vector>

namespace testoracle {

struct GaeInput {
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  double bootstrapValue = 0.0;  // V(s_{T}) when the tail is non-terminal
};

inline std::vector<double> bruteForceAdvantages(const GaeInput& in, double gamma, double lambda) {
  const int n = static_cast<int>(in.rewards.size());
  std::vector<double> adv(n, 0.0);
  for (int t = 0; t < n; ++t) {
    double weight = 1.0;
    for (int k = t; k < n; ++k) {
      const double nextValue = (k == n - 1) ? in.bootstrapValue : in.values[k + 1];
      const double nonTerminal = in.dones[k] ? 0.0 : 1.0;
      const double delta = in.rewards[k] + gamma * nextValue * nonTerminal - in.values[k];
      adv[t] += weight * delta;
      if (in.dones[k]) break;  // no credit flows across an episode boundary
      weight *= gamma * lambda;
    }
  }
  return adv;
}

}  // namespace testoracle
