// Compact actor-critic MLP with a tanh-squashed Gaussian action head and a
// scalar value head sharing the trunk. Forward and backward passes are
// hand-rolled over a flat double parameter vector; no autograd dependency.
//
// Default architecture: 3 inputs -> 64 -> 64 (tanh) -> {action means, value},
// with a state-independent learned log standard deviation per action axis.
// Policies are immutable in use: training builds new parameter vectors,
// concurrent read-only inference is safe.
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "padland/rng.hpp"

namespace padland::nn {

struct PolicyArch {
  int inputDim = 3;
  std::vector<int> hidden{64, 64};
  int actionDim = 4;

  bool operator==(const PolicyArch&) const = default;

  void validate() const {
    if (inputDim <= 0 || actionDim <= 0 || hidden.empty())
      throw std::invalid_argument("PolicyArch: dimensions must be positive");
    for (int h : hidden)
      if (h <= 0) throw std::invalid_argument("PolicyArch: hidden sizes must be positive");
  }
};

struct ActionDistribution {
  std::vector<double> mean;
  std::vector<double> std;  // strictly positive elementwise
};

constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)
constexpr double kAtanhClamp = 1.0 - 1e-6;

// Gaussian log-density of atanh(action) plus the tanh change-of-variables
// term. Components at or beyond +-1 are clamped to +-(1 - 1e-6) before atanh.
inline double log_prob(const ActionDistribution& dist, std::span<const double> action) {
  double lp = 0.0;
  for (std::size_t j = 0; j < dist.mean.size(); ++j) {
    const double a = std::clamp(action[j], -kAtanhClamp, kAtanhClamp);
    const double u = std::atanh(a);
    const double z = (u - dist.mean[j]) / dist.std[j];
    lp += -0.5 * z * z - std::log(dist.std[j]) - 0.5 * kLogTwoPi;
    lp -= std::log((1.0 - a) * (1.0 + a));
  }
  return lp;
}

struct SampledAction {
  std::vector<double> action;  // squashed, strictly inside (-1, 1)
  double logProb = 0.0;
};

inline SampledAction sample_action(const ActionDistribution& dist, Rng& rng) {
  SampledAction out;
  out.action.resize(dist.mean.size());
  for (std::size_t j = 0; j < dist.mean.size(); ++j) {
    const double u = dist.mean[j] + dist.std[j] * rng.normal();
    out.action[j] = std::clamp(std::tanh(u), -kAtanhClamp, kAtanhClamp);
  }
  // Computed through the same path as log_prob so the two agree exactly.
  out.logProb = log_prob(dist, out.action);
  return out;
}

// Entropy of the pre-squash Gaussian, the usual surrogate for the squashed
// distribution (whose entropy has no closed form).
inline double entropy(const ActionDistribution& dist) {
  double h = 0.0;
  for (double s : dist.std) h += std::log(s) + 0.5 * (1.0 + kLogTwoPi);
  return h;
}

// Per-sample activation cache reused across forward/backward calls.
struct Workspace {
  std::vector<std::vector<double>> act;  // act[0] = input, act[i] = tanh output of layer i
  std::vector<double> mean;
  double value = 0.0;
};

class Policy {
 public:
  Policy() : Policy(PolicyArch{}) {}

  explicit Policy(PolicyArch arch) : arch_(std::move(arch)) {
    arch_.validate();
    computeLayout();
    params_.assign(paramCount_, 0.0);
    std::fill(logStd().begin(), logStd().end(), -0.5);
  }

  // Xavier-uniform trunk, small-scale action head (standard PPO init),
  // unit-scale value head, log std -0.5.
  static Policy randomInit(const PolicyArch& arch, std::uint64_t seed) {
    Policy p(arch);
    Rng rng(seed);
    const int layers = static_cast<int>(p.dims_.size()) - 1;
    for (int l = 0; l < layers; ++l) {
      const double headScale = (l == layers - 1) ? 0.01 : 1.0;
      const double bound = std::sqrt(6.0 / (p.dims_[l] + p.dims_[l + 1]));
      auto w = p.weight(l);
      for (auto& v : w) v = headScale * rng.uniform(-bound, bound);
    }
    // The value head shares the final layer slot; re-scale its row back up.
    auto wv = p.valueRow();
    for (auto& v : wv) v *= 100.0;
    return p;
  }

  const PolicyArch& arch() const { return arch_; }
  std::size_t paramCount() const { return paramCount_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::span<double> logStd() { return {params_.data() + logStdOffset_, static_cast<std::size_t>(arch_.actionDim)}; }
  std::span<const double> logStd() const { return {params_.data() + logStdOffset_, static_cast<std::size_t>(arch_.actionDim)}; }

  // Deterministic forward pass; obs must be finite with inputDim components.
  void forward(std::span<const double> obs, Workspace& ws) const {
    if (obs.size() != static_cast<std::size_t>(arch_.inputDim))
      throw std::invalid_argument("Policy::forward: observation size mismatch");
    for (double v : obs)
      if (!std::isfinite(v)) throw std::invalid_argument("Policy::forward: non-finite observation");

    const int layers = static_cast<int>(dims_.size()) - 1;
    ws.act.resize(layers);  // hidden activations only; heads handled below
    const double* x = obs.data();
    int xDim = arch_.inputDim;
    for (int l = 0; l < layers - 1; ++l) {
      auto& out = ws.act[l];
      out.resize(dims_[l + 1]);
      const double* w = params_.data() + weightOffset_[l];
      const double* b = params_.data() + biasOffset_[l];
      for (int i = 0; i < dims_[l + 1]; ++i) {
        double acc = b[i];
        const double* row = w + static_cast<std::size_t>(i) * xDim;
        for (int j = 0; j < xDim; ++j) acc += row[j] * x[j];
        out[i] = std::tanh(acc);
      }
      x = out.data();
      xDim = dims_[l + 1];
    }

    ws.mean.resize(arch_.actionDim);
    const int l = layers - 1;
    const double* w = params_.data() + weightOffset_[l];
    const double* b = params_.data() + biasOffset_[l];
    for (int i = 0; i < arch_.actionDim; ++i) {
      double acc = b[i];
      const double* row = w + static_cast<std::size_t>(i) * xDim;
      for (int j = 0; j < xDim; ++j) acc += row[j] * x[j];
      ws.mean[i] = acc;
    }
    {
      double acc = b[arch_.actionDim];
      const double* row = w + static_cast<std::size_t>(arch_.actionDim) * xDim;
      for (int j = 0; j < xDim; ++j) acc += row[j] * x[j];
      ws.value = acc;
    }
  }

  ActionDistribution dist(std::span<const double> obs, Workspace& ws) const {
    forward(obs, ws);
    ActionDistribution d;
    d.mean = ws.mean;
    d.std.resize(arch_.actionDim);
    const auto ls = logStd();
    for (int j = 0; j < arch_.actionDim; ++j) d.std[j] = std::exp(ls[j]);
    return d;
  }

  ActionDistribution dist(std::span<const double> obs) const {
    Workspace ws;
    return dist(obs, ws);
  }

  double value(std::span<const double> obs) const {
    Workspace ws;
    forward(obs, ws);
    return ws.value;
  }

  // Deployment action: squashed distribution mean, no sampling.
  std::vector<double> actMean(std::span<const double> obs, Workspace& ws) const {
    forward(obs, ws);
    std::vector<double> a(ws.mean.size());
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = std::tanh(ws.mean[j]);
    return a;
  }

  // Accumulates dLoss/dParams into `grad` given upstream gradients on the
  // action means and the value, using the activations cached by the matching
  // forward call. `obs` must be the same observation.
  void backward(std::span<const double> obs, const Workspace& ws,
                std::span<const double> dMean, double dValue,
                std::vector<double>& grad) const {
    const int layers = static_cast<int>(dims_.size()) - 1;
    const int lastHidden = dims_[layers - 1];
    std::vector<double> dAct(lastHidden, 0.0);

    // Head layer: rows 0..A-1 are the mean head, row A is the value head.
    const int l = layers - 1;
    const double* w = params_.data() + weightOffset_[l];
    double* gw = grad.data() + weightOffset_[l];
    double* gb = grad.data() + biasOffset_[l];
    const double* a = ws.act[layers - 2].data();
    for (int i = 0; i < arch_.actionDim; ++i) {
      const double d = dMean[i];
      if (d == 0.0) continue;
      gb[i] += d;
      double* grow = gw + static_cast<std::size_t>(i) * lastHidden;
      const double* row = w + static_cast<std::size_t>(i) * lastHidden;
      for (int j = 0; j < lastHidden; ++j) {
        grow[j] += d * a[j];
        dAct[j] += d * row[j];
      }
    }
    if (dValue != 0.0) {
      gb[arch_.actionDim] += dValue;
      double* grow = gw + static_cast<std::size_t>(arch_.actionDim) * lastHidden;
      const double* row = w + static_cast<std::size_t>(arch_.actionDim) * lastHidden;
      for (int j = 0; j < lastHidden; ++j) {
        grow[j] += dValue * a[j];
        dAct[j] += dValue * row[j];
      }
    }

    // Hidden layers, back to front.
    for (int h = layers - 2; h >= 0; --h) {
      const int outDim = dims_[h + 1];
      const int inDim = dims_[h];
      const double* act = ws.act[h].data();
      const double* prev = (h == 0) ? obs.data() : ws.act[h - 1].data();
      std::vector<double> dPrev(inDim, 0.0);
      const double* wh = params_.data() + weightOffset_[h];
      double* gwh = grad.data() + weightOffset_[h];
      double* gbh = grad.data() + biasOffset_[h];
      for (int i = 0; i < outDim; ++i) {
        const double dz = dAct[i] * (1.0 - act[i] * act[i]);
        if (dz == 0.0) continue;
        gbh[i] += dz;
        double* grow = gwh + static_cast<std::size_t>(i) * inDim;
        const double* row = wh + static_cast<std::size_t>(i) * inDim;
        for (int j = 0; j < inDim; ++j) {
          grow[j] += dz * prev[j];
          dPrev[j] += dz * row[j];
        }
      }
      dAct = std::move(dPrev);
    }
  }

  // Sanity check used by tests and loaders: finite parameters and a sane
  // forward pass on the zero observation.
  bool healthy() const {
    for (double v : params_)
      if (!std::isfinite(v)) return false;
    std::vector<double> zero(arch_.inputDim, 0.0);
    Workspace ws;
    forward(zero, ws);
    for (double m : ws.mean)
      if (!std::isfinite(m)) return false;
    if (!std::isfinite(ws.value)) return false;
    for (double ls : logStd())
      if (!(std::exp(ls) > 0.0)) return false;
    return true;
  }

  // Layout introspection (used by the quantizer and serializer).
  int layerCount() const { return static_cast<int>(dims_.size()) - 1; }
  std::span<double> weight(int layer) {
    return {params_.data() + weightOffset_[layer],
            static_cast<std::size_t>(dims_[layer]) * dims_[layer + 1]};
  }
  std::span<const double> weight(int layer) const {
    return {params_.data() + weightOffset_[layer],
            static_cast<std::size_t>(dims_[layer]) * dims_[layer + 1]};
  }
  std::span<double> bias(int layer) {
    return {params_.data() + biasOffset_[layer], static_cast<std::size_t>(dims_[layer + 1])};
  }
  std::span<const double> bias(int layer) const {
    return {params_.data() + biasOffset_[layer], static_cast<std::size_t>(dims_[layer + 1])};
  }
  int layerInputDim(int layer) const { return dims_[layer]; }
  int layerOutputDim(int layer) const { return dims_[layer + 1]; }

 private:
  std::span<double> valueRow() {
    const int l = layerCount() - 1;
    const int inDim = dims_[l];
    return {params_.data() + weightOffset_[l] + static_cast<std::size_t>(arch_.actionDim) * inDim,
            static_cast<std::size_t>(inDim)};
  }

  void computeLayout() {
    dims_.clear();
    dims_.push_back(arch_.inputDim);
    for (int h : arch_.hidden) dims_.push_back(h);
    dims_.push_back(arch_.actionDim + 1);  // mean head rows + one value row

    std::size_t offset = 0;
    const int layers = static_cast<int>(dims_.size()) - 1;
    weightOffset_.resize(layers);
    biasOffset_.resize(layers);
    for (int l = 0; l < layers; ++l) {
      weightOffset_[l] = offset;
      offset += static_cast<std::size_t>(dims_[l]) * dims_[l + 1];
      biasOffset_[l] = offset;
      offset += dims_[l + 1];
    }
    logStdOffset_ = offset;
    offset += arch_.actionDim;
    paramCount_ = offset;
  }

  PolicyArch arch_;
  std::vector<int> dims_;  // input, hidden..., actionDim+1
  std::vector<std::size_t> weightOffset_;
  std::vector<std::size_t> biasOffset_;
  std::size_t logStdOffset_ = 0;
  std::size_t paramCount_ = 0;
  std::vector<double> params_;
};

}  // namespace padland::nn
