// Rollout storage and generalized advantage estimation.
//
// Layout: sample (env e, step t) lives at flat index e * length + t, so each
// environment's segment is contiguous and the GAE recursion never crosses an
// episode boundary it should not (done flags gate both the bootstrap and the
// recursion).
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "padland/nn/policy.hpp"
#include "padland/rng.hpp"

namespace padland::rl {

// What an environment returns from one step; the common currency between
// environments, the rollout collector, and the trainer. `truncated` marks
// episode ends that cut the horizon without a real terminal state (timeouts,
// lost tracking); the collector bootstraps value through those so the critic
// does not learn a spurious zero future.
struct EnvStep {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  bool truncated = false;
  bool success = false;
};

struct Trajectory {
  int obsDim = 0;
  int actDim = 0;
  int envCount = 0;
  int length = 0;  // steps per environment

  std::vector<double> observations;  // [env*length + t][obsDim]
  std::vector<double> actions;       // [env*length + t][actDim]
  std::vector<double> logProbs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;       // episode ended at this step
  std::vector<double> bootstrapValues;   // per env: V(obs after the last step)
  std::vector<std::uint8_t> lastDone;    // per env: last step ended an episode

  std::vector<double> advantages;
  std::vector<double> returns;

  // Episode statistics completed during collection.
  std::vector<double> episodeReturns;
  std::vector<std::uint8_t> episodeSuccesses;

  int sampleCount() const { return envCount * length; }
  std::span<const double> obsAt(int idx) const {
    return {observations.data() + static_cast<std::size_t>(idx) * obsDim,
            static_cast<std::size_t>(obsDim)};
  }
  std::span<const double> actionAt(int idx) const {
    return {actions.data() + static_cast<std::size_t>(idx) * actDim,
            static_cast<std::size_t>(actDim)};
  }

  void resize(int envs, int len, int nObs, int nAct) {
    envCount = envs;
    length = len;
    obsDim = nObs;
    actDim = nAct;
    const std::size_t n = static_cast<std::size_t>(envs) * len;
    observations.assign(n * nObs, 0.0);
    actions.assign(n * nAct, 0.0);
    logProbs.assign(n, 0.0);
    rewards.assign(n, 0.0);
    values.assign(n, 0.0);
    dones.assign(n, 0);
    bootstrapValues.assign(envs, 0.0);
    lastDone.assign(envs, 0);
    advantages.assign(n, 0.0);
    returns.assign(n, 0.0);
    episodeReturns.clear();
    episodeSuccesses.clear();
  }
};

// A_t = sum_k (gamma*lambda)^k * delta_{t+k}, with
// delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t); returns are
// advantages + values. Requires bootstrap values for non-terminal tails.
inline void gae_advantages(Trajectory& traj, double gamma, double lambda) {
  for (int e = 0; e < traj.envCount; ++e) {
    const int base = e * traj.length;
    double carry = 0.0;
    for (int t = traj.length - 1; t >= 0; --t) {
      const int i = base + t;
      const double nonTerminal = traj.dones[i] ? 0.0 : 1.0;
      const double nextValue =
          (t == traj.length - 1) ? traj.bootstrapValues[e] : traj.values[i + 1];
      const double delta =
          traj.rewards[i] + gamma * nextValue * nonTerminal - traj.values[i];
      carry = delta + gamma * lambda * nonTerminal * carry;
      traj.advantages[i] = carry;
      traj.returns[i] = carry + traj.values[i];
    }
  }
}

// Gathers `length` steps from every environment with the sampling policy.
// Environments auto-reset on episode end from their own seed streams, so the
// whole collection is a pure function of (policy, env states, rng).
// `runningEpisodeReturns` persists across rollouts: episodes that straddle a
// rollout boundary still report their full return when they finish.
// When `gamma` is positive, truncated episode ends fold the bootstrap value
// of the final observation into that step's reward (time-limit handling; the
// GAE recursion itself still stops at the boundary).
template <typename Env>
Trajectory collect_rollout(const nn::Policy& policy, std::vector<Env>& envs,
                           std::vector<std::vector<double>>& currentObs,
                           std::vector<double>& runningEpisodeReturns, int length, Rng& rng,
                           double gamma = 0.0) {
  if (envs.empty()) throw std::invalid_argument("collect_rollout: no environments");
  Trajectory traj;
  traj.resize(static_cast<int>(envs.size()), length, envs[0].observationSize(),
              envs[0].actionSize());
  runningEpisodeReturns.resize(envs.size(), 0.0);

  nn::Workspace ws;
  for (int e = 0; e < traj.envCount; ++e) {
    Env& env = envs[e];
    double& epReturn = runningEpisodeReturns[e];
    for (int t = 0; t < length; ++t) {
      const int i = e * length + t;
      std::copy(currentObs[e].begin(), currentObs[e].end(),
                traj.observations.begin() + static_cast<std::size_t>(i) * traj.obsDim);

      const nn::ActionDistribution dist = policy.dist(currentObs[e], ws);
      traj.values[i] = ws.value;
      const nn::SampledAction sampled = nn::sample_action(dist, rng);
      std::copy(sampled.action.begin(), sampled.action.end(),
                traj.actions.begin() + static_cast<std::size_t>(i) * traj.actDim);
      traj.logProbs[i] = sampled.logProb;

      const EnvStep stepOut = env.step(sampled.action);
      traj.rewards[i] = stepOut.reward;
      traj.dones[i] = stepOut.done ? 1 : 0;
      epReturn += stepOut.reward;
      if (stepOut.done && stepOut.truncated && gamma > 0.0) {
        policy.forward(stepOut.observation, ws);
        traj.rewards[i] += gamma * ws.value;
      }

      if (stepOut.done) {
        traj.episodeReturns.push_back(epReturn);
        traj.episodeSuccesses.push_back(stepOut.success ? 1 : 0);
        epReturn = 0.0;
        currentObs[e] = env.resetNext();
      } else {
        currentObs[e] = stepOut.observation;
      }
    }
    traj.lastDone[e] = traj.dones[e * length + length - 1];
    if (traj.lastDone[e]) {
      traj.bootstrapValues[e] = 0.0;
    } else {
      policy.forward(currentObs[e], ws);
      traj.bootstrapValues[e] = ws.value;
    }
  }
  return traj;
}

}  // namespace padland::rl
