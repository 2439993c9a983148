// Proximal policy optimization over the hand-rolled actor-critic.
//
// Loss per sample, minimized:
//   max(-A * ratio, -A * clamp(ratio, 1 -/+ eps)) + valueCoef * 0.5 (V - R)^2
//   - entropyCoef * H(pre-squash Gaussian)
// with ratio = exp(logProb_new - logProb_old). Advantages are re-normalized
// from their raw values at the start of every epoch (never normalized twice),
// minibatch order is a seeded shuffle, and the whole update is deterministic
// for a fixed (policy, trajectory, config, seed).
#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "padland/nn/policy.hpp"
#include "padland/rl/adam.hpp"
#include "padland/rl/rollout.hpp"
#include "padland/rng.hpp"

namespace padland::rl {

struct TrainConfig {
  nn::PolicyArch arch;
  double gamma = 0.99;
  double lambda = 0.95;
  double clipEpsilon = 0.2;
  double learningRate = 3e-4;
  int rolloutLength = 2048;  // steps per environment per iteration
  int epochs = 4;
  int minibatchSize = 512;
  long totalSteps = 3000000;
  double entropyCoef = 0.005;
  double valueCoef = 0.5;
  double maxGradNorm = 0.5;  // 0 disables clipping
  int numEnvs = 8;
  // Linear annealing across the step budget; negative keeps the initial
  // value for the whole run.
  double learningRateFinal = -1.0;
  double entropyCoefFinal = -1.0;
  // Fold V(s_T) into the reward at truncated episode ends (classic time-limit
  // handling). Off by default: on the landing task the corrected values make
  // hovering near the pad look as good as it really is, which is exactly the
  // equilibrium training needs to push through.
  bool timeLimitBootstrap = false;
  std::uint64_t seed = 0;
  double stopAtSuccessRate = 0.0;  // early stop when the rolling success rate
  int successWindow = 100;         // over this many episodes reaches it; 0 = off
  int checkpointEveryIters = 0;

  void validate() const {
    arch.validate();
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("TrainConfig: gamma in (0, 1]");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("TrainConfig: lambda in [0, 1]");
    if (!(clipEpsilon > 0.0)) throw std::invalid_argument("TrainConfig: clipEpsilon > 0");
    if (rolloutLength <= 0 || epochs <= 0 || minibatchSize <= 0 || numEnvs <= 0)
      throw std::invalid_argument("TrainConfig: batch shape fields must be positive");
    if (totalSteps < 0) throw std::invalid_argument("TrainConfig: totalSteps must be >= 0");
  }
};

struct PpoLossStats {
  double total = 0.0;
  double policyLoss = 0.0;
  double valueLoss = 0.0;
  double entropy = 0.0;
  double approxKl = 0.0;
  double clipFraction = 0.0;
  bool finite = true;
};

// Loss (and, when `grad` is non-null, its gradient w.r.t. every policy
// parameter) averaged over the given sample indices. `normalizedAdvantages`
// is indexed by flat sample id.
inline PpoLossStats ppo_loss_and_grad(const nn::Policy& policy, const Trajectory& traj,
                                      std::span<const int> indices,
                                      std::span<const double> normalizedAdvantages,
                                      const TrainConfig& cfg, std::vector<double>* grad) {
  PpoLossStats stats;
  if (indices.empty()) return stats;
  const double invN = 1.0 / static_cast<double>(indices.size());
  const int actionDim = policy.arch().actionDim;

  nn::Workspace ws;
  std::vector<double> dMean(actionDim);
  const auto logStd = policy.logStd();
  std::vector<double> stdv(actionDim);
  double entropyPerSample = 0.0;
  for (int j = 0; j < actionDim; ++j) {
    stdv[j] = std::exp(logStd[j]);
    entropyPerSample += logStd[j] + 0.5 * (1.0 + nn::kLogTwoPi);
  }
  // logStd parameters sit at the tail of the parameter vector.
  const std::size_t logStdBase = policy.paramCount() - actionDim;

  for (const int idx : indices) {
    const auto obs = traj.obsAt(idx);
    const auto action = traj.actionAt(idx);
    policy.forward(obs, ws);

    double lpNew = 0.0;
    std::vector<double> u(actionDim), z(actionDim);
    for (int j = 0; j < actionDim; ++j) {
      const double a = std::clamp(action[j], -nn::kAtanhClamp, nn::kAtanhClamp);
      u[j] = std::atanh(a);
      z[j] = (u[j] - ws.mean[j]) / stdv[j];
      lpNew += -0.5 * z[j] * z[j] - logStd[j] - 0.5 * nn::kLogTwoPi;
      lpNew -= std::log((1.0 - a) * (1.0 + a));
    }

    const double logRatio = lpNew - traj.logProbs[idx];
    const double ratio = std::exp(logRatio);
    const double adv = normalizedAdvantages[idx];
    const double clipped = std::clamp(ratio, 1.0 - cfg.clipEpsilon, 1.0 + cfg.clipEpsilon);
    const double lossUnclipped = -adv * ratio;
    const double lossClipped = -adv * clipped;
    const bool takeUnclipped = lossUnclipped >= lossClipped;
    const double pgLoss = takeUnclipped ? lossUnclipped : lossClipped;

    const double vErr = ws.value - traj.returns[idx];
    const double vLoss = 0.5 * vErr * vErr;

    stats.policyLoss += pgLoss * invN;
    stats.valueLoss += vLoss * invN;
    stats.entropy += entropyPerSample * invN;
    stats.approxKl += ((ratio - 1.0) - logRatio) * invN;
    if (std::abs(ratio - 1.0) > cfg.clipEpsilon) stats.clipFraction += invN;

    if (grad) {
      double dlp = 0.0;
      if (takeUnclipped) {
        dlp = -adv * ratio;
      } else if (ratio > 1.0 - cfg.clipEpsilon && ratio < 1.0 + cfg.clipEpsilon) {
        dlp = -adv * ratio;
      }
      dlp *= invN;
      const double dValue = cfg.valueCoef * vErr * invN;
      for (int j = 0; j < actionDim; ++j) {
        dMean[j] = dlp * (z[j] / stdv[j]);
        (*grad)[logStdBase + j] += dlp * (z[j] * z[j] - 1.0) - cfg.entropyCoef * invN;
      }
      policy.backward(obs, ws, dMean, dValue, *grad);
    }
  }

  stats.total = stats.policyLoss + cfg.valueCoef * stats.valueLoss - cfg.entropyCoef * stats.entropy;
  stats.finite = std::isfinite(stats.total);
  return stats;
}

struct UpdateStats {
  double policyLoss = 0.0;
  double valueLoss = 0.0;
  double entropy = 0.0;
  double approxKl = 0.0;
  double clipFraction = 0.0;
  int minibatches = 0;
  bool aborted = false;
  std::string diagnostics;
};

// One PPO update over a collected trajectory: epochs x shuffled minibatches
// with Adam. On a non-finite loss the policy is restored to its pre-update
// parameters and the stats report the abort.
inline UpdateStats ppo_update(nn::Policy& policy, const Trajectory& traj, const TrainConfig& cfg,
                              Adam& adam, Rng& shuffleRng) {
  UpdateStats out;
  const int n = traj.sampleCount();
  if (n == 0) return out;
  const std::vector<double> backup = policy.params();

  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);
  std::vector<double> normAdv(n, 0.0);
  std::vector<double> grad(policy.paramCount(), 0.0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fresh normalization from the raw advantages each epoch.
    double mean = 0.0;
    for (double a : traj.advantages) mean += a;
    mean /= n;
    double var = 0.0;
    for (double a : traj.advantages) var += (a - mean) * (a - mean);
    const double stddev = std::sqrt(var / n) + 1e-8;
    for (int i = 0; i < n; ++i) normAdv[i] = (traj.advantages[i] - mean) / stddev;

    // Fisher-Yates with the seeded stream.
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffleRng.uniformIndex(static_cast<std::uint64_t>(i) + 1));
      std::swap(indices[i], indices[j]);
    }

    for (int start = 0; start < n; start += cfg.minibatchSize) {
      const int end = std::min(start + cfg.minibatchSize, n);
      std::fill(grad.begin(), grad.end(), 0.0);
      const PpoLossStats stats = ppo_loss_and_grad(
          policy, traj, {indices.data() + start, static_cast<std::size_t>(end - start)},
          normAdv, cfg, &grad);
      if (!stats.finite) {
        policy.params() = backup;
        out.aborted = true;
        out.diagnostics = "non-finite PPO loss at epoch " + std::to_string(epoch) +
                          ", minibatch starting " + std::to_string(start);
        return out;
      }
      if (cfg.maxGradNorm > 0.0) {
        double norm2 = 0.0;
        for (double g : grad) norm2 += g * g;
        const double norm = std::sqrt(norm2);
        if (norm > cfg.maxGradNorm) {
          const double scale = cfg.maxGradNorm / norm;
          for (double& g : grad) g *= scale;
        }
      }
      adam.step(policy.params(), grad);

      out.policyLoss += stats.policyLoss;
      out.valueLoss += stats.valueLoss;
      out.entropy += stats.entropy;
      out.approxKl += stats.approxKl;
      out.clipFraction += stats.clipFraction;
      out.minibatches += 1;
    }
  }
  if (out.minibatches > 0) {
    out.policyLoss /= out.minibatches;
    out.valueLoss /= out.minibatches;
    out.entropy /= out.minibatches;
    out.approxKl /= out.minibatches;
    out.clipFraction /= out.minibatches;
  }
  return out;
}

struct IterationLog {
  int iteration = 0;
  long steps = 0;
  double meanEpisodeReward = 0.0;
  double successRate = 0.0;
  int episodes = 0;
  UpdateStats update;
};

struct TrainResult {
  nn::Policy policy;
  std::vector<IterationLog> curve;
  long totalSteps = 0;
  bool aborted = false;
  std::string diagnostics;
};

// Full training loop: collect / GAE / update until the step budget is spent
// or the rolling success rate reaches the configured early-stop threshold.
// `onCheckpoint(policy, iteration)` fires every checkpointEveryIters
// iterations, on divergence aborts, and once at the end.
template <typename Env>
TrainResult train(const TrainConfig& cfg, std::vector<Env>& envs,
                  const std::function<void(const IterationLog&)>& onIteration = {},
                  const std::function<void(const nn::Policy&, int)>& onCheckpoint = {}) {
  cfg.validate();
  if (envs.empty()) throw std::invalid_argument("train: no environments");
  if (envs[0].observationSize() != cfg.arch.inputDim ||
      envs[0].actionSize() != cfg.arch.actionDim)
    throw std::invalid_argument("train: architecture does not match the environment");

  Rng root(cfg.seed);
  TrainResult result;
  result.policy = nn::Policy::randomInit(cfg.arch, root.fork(0).nextU64());
  if (cfg.totalSteps == 0) return result;

  Rng sampleRng = root.fork(1);
  Rng shuffleRng = root.fork(2);
  Adam adam(result.policy.paramCount(), cfg.learningRate);

  std::vector<std::vector<double>> currentObs;
  currentObs.reserve(envs.size());
  for (auto& env : envs) currentObs.push_back(env.resetNext());
  std::vector<double> runningReturns(envs.size(), 0.0);

  std::deque<int> successWindow;
  int successCount = 0;
  long steps = 0;
  const long stepsPerIter = static_cast<long>(cfg.rolloutLength) * cfg.numEnvs;
  int iteration = 0;
  double lastMeanReward = 0.0;

  while (steps < cfg.totalSteps) {
    iteration += 1;
    // Annealed coefficients for this iteration.
    TrainConfig iterCfg = cfg;
    const double progress = std::min(1.0, static_cast<double>(steps) / cfg.totalSteps);
    if (cfg.learningRateFinal >= 0.0)
      iterCfg.learningRate =
          cfg.learningRate + (cfg.learningRateFinal - cfg.learningRate) * progress;
    if (cfg.entropyCoefFinal >= 0.0)
      iterCfg.entropyCoef =
          cfg.entropyCoef + (cfg.entropyCoefFinal - cfg.entropyCoef) * progress;
    adam.setLearningRate(iterCfg.learningRate);

    Trajectory traj = collect_rollout(result.policy, envs, currentObs, runningReturns,
                                      cfg.rolloutLength, sampleRng,
                                      cfg.timeLimitBootstrap ? cfg.gamma : 0.0);
    steps += stepsPerIter;
    gae_advantages(traj, cfg.gamma, cfg.lambda);
    const UpdateStats update = ppo_update(result.policy, traj, iterCfg, adam, shuffleRng);

    IterationLog log;
    log.iteration = iteration;
    log.steps = steps;
    log.episodes = static_cast<int>(traj.episodeReturns.size());
    if (!traj.episodeReturns.empty()) {
      double sum = 0.0;
      for (double r : traj.episodeReturns) sum += r;
      lastMeanReward = sum / traj.episodeReturns.size();
    }
    log.meanEpisodeReward = lastMeanReward;
    for (std::uint8_t s : traj.episodeSuccesses) {
      successWindow.push_back(s);
      successCount += s;
      if (static_cast<int>(successWindow.size()) > cfg.successWindow) {
        successCount -= successWindow.front();
        successWindow.pop_front();
      }
    }
    log.successRate = successWindow.empty()
                          ? 0.0
                          : static_cast<double>(successCount) / successWindow.size();
    log.update = update;
    result.curve.push_back(log);
    if (onIteration) onIteration(log);

    const bool diverged = !std::isfinite(lastMeanReward);
    if (update.aborted || diverged) {
      result.aborted = true;
      result.diagnostics = update.aborted ? update.diagnostics : "mean episode reward diverged";
      if (onCheckpoint) onCheckpoint(result.policy, iteration);
      break;
    }
    if (onCheckpoint && cfg.checkpointEveryIters > 0 && iteration % cfg.checkpointEveryIters == 0)
      onCheckpoint(result.policy, iteration);
    if (cfg.stopAtSuccessRate > 0.0 &&
        static_cast<int>(successWindow.size()) >= cfg.successWindow &&
        log.successRate >= cfg.stopAtSuccessRate)
      break;
  }
  result.totalSteps = steps;
  if (!result.aborted && onCheckpoint) onCheckpoint(result.policy, iteration);
  return result;
}

inline std::string training_curve_csv(const std::vector<IterationLog>& curve) {
  std::string out =
      "iteration,steps,mean_episode_reward,success_rate,episodes,policy_loss,value_loss,"
      "entropy,approx_kl,clip_fraction\n";
  char line[512];
  for (const auto& row : curve) {
    std::snprintf(line, sizeof(line), "%d,%ld,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  row.iteration, row.steps, row.meanEpisodeReward, row.successRate, row.episodes,
                  row.update.policyLoss, row.update.valueLoss, row.update.entropy,
                  row.update.approxKl, row.update.clipFraction);
    out += line;
  }
  return out;
}

}  // namespace padland::rl
