// The shipped landing training protocol: the exact environment spec and PPO
// hyperparameters used to produce the released policies. Kept in one place so
// the CLI, the acceptance suite, and any retraining run reproduce the same
// bytes for the same seed. configs/landing_train.json mirrors these values.
#pragma once

#include <functional>
#include <vector>

#include "padland/rl/landing_env.hpp"
#include "padland/rl/ppo.hpp"

namespace padland::landing_protocol {

// Training environment: platform speeds capped at 0.45 m/s (the evaluation
// regime plus a sliver of margin; the 0.4 m/s UAV cannot gain on faster
// platforms and chasing them only teaches hovering) and 40 s episodes (full
// descents from 20 m fit in ~25 s; the shorter horizon turns over more
// episodes per step and shrinks the payoff of loitering in place).
inline sim::SimConfig simConfig() {
  sim::SimConfig cfg;
  cfg.episode.platformSpeedMax = 0.45;
  cfg.episode.maxSeconds = 40.0;
  return cfg;
}

inline rl::TrainConfig trainConfig(std::uint64_t seed) {
  rl::TrainConfig cfg;
  cfg.totalSteps = 3000000;
  cfg.seed = seed;
  cfg.entropyCoef = 0.002;
  cfg.successWindow = 300;
  return cfg;
}

inline std::vector<rl::LandingEnv> makeEnvs(const rl::TrainConfig& cfg) {
  std::vector<rl::LandingEnv> envs;
  envs.reserve(cfg.numEnvs);
  for (int e = 0; e < cfg.numEnvs; ++e) {
    envs.emplace_back(simConfig(), rl::RewardSpec{}, rl::NormalizationBounds{},
                      Rng(cfg.seed).fork(100 + e).nextU64(), 8);
  }
  return envs;
}

inline rl::TrainResult train(
    std::uint64_t seed, const std::function<void(const rl::IterationLog&)>& onIteration = {},
    const std::function<void(const nn::Policy&, int)>& onCheckpoint = {}) {
  const rl::TrainConfig cfg = trainConfig(seed);
  auto envs = makeEnvs(cfg);
  return rl::train(cfg, envs, onIteration, onCheckpoint);
}

}  // namespace padland::landing_protocol
