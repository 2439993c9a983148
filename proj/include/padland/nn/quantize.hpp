// Post-training compression: unstructured magnitude pruning plus per-tensor
// affine 8-bit quantization, with activation ranges calibrated on a sample of
// observations. Pruned weights serialize as a presence bitmap + packed int8
// values, which is where the bulk of the size reduction comes from.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "padland/nn/model_io.hpp"
#include "padland/nn/policy.hpp"
#include "padland/result.hpp"

namespace padland::nn {

struct QuantizedTensor {
  double scale = 1.0;
  std::int32_t zeroPoint = 0;  // kept for format generality; symmetric -> 0
  std::vector<std::uint8_t> presence;  // bitmap, one bit per weight
  std::vector<std::int8_t> values;     // packed nonzero quantized weights
  std::size_t count = 0;               // total weights including pruned

  double dequant(std::size_t packedIndex) const {
    return scale * (static_cast<double>(values[packedIndex]) - zeroPoint);
  }
};

class QuantizedPolicy {
 public:
  QuantizedPolicy() = default;

  const PolicyArch& arch() const { return arch_; }

  // Inference with fake-quantized activations: every layer input is snapped
  // to its calibrated 8-bit grid, weights are the dequantized pruned tensors.
  void forward(std::span<const double> obs, Workspace& ws) const {
    ws.act.resize(denseWeights_.size());
    std::vector<double> x(obs.begin(), obs.end());
    quantizeActivations(x, 0);
    const int layers = static_cast<int>(denseWeights_.size());
    for (int l = 0; l < layers - 1; ++l) {
      auto& out = ws.act[l];
      const int outDim = dims_[l + 1];
      const int inDim = dims_[l];
      out.resize(outDim);
      for (int i = 0; i < outDim; ++i) {
        double acc = biases_[l][i];
        const double* row = denseWeights_[l].data() + static_cast<std::size_t>(i) * inDim;
        for (int j = 0; j < inDim; ++j) acc += row[j] * x[j];
        out[i] = std::tanh(acc);
      }
      x = out;
      quantizeActivations(x, l + 1);
    }
    const int l = layers - 1;
    const int inDim = dims_[l];
    ws.mean.resize(actionDim());
    for (int i = 0; i < actionDim(); ++i) {
      double acc = biases_[l][i];
      const double* row = denseWeights_[l].data() + static_cast<std::size_t>(i) * inDim;
      for (int j = 0; j < inDim; ++j) acc += row[j] * x[j];
      ws.mean[i] = acc;
    }
    double acc = biases_[l][actionDim()];
    const double* row = denseWeights_[l].data() + static_cast<std::size_t>(actionDim()) * inDim;
    for (int j = 0; j < inDim; ++j) acc += row[j] * x[j];
    ws.value = acc;
  }

  std::vector<double> actMean(std::span<const double> obs, Workspace& ws) const {
    forward(obs, ws);
    std::vector<double> a(ws.mean.size());
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = std::tanh(ws.mean[j]);
    return a;
  }

  int actionDim() const { return arch_.actionDim; }

  std::size_t nonzeroWeightCount() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.values.size();
    return n;
  }

  std::vector<std::uint8_t> serialize() const {
    detail::ByteWriter w;
    detail::writeHeader(w, arch_, kDtypeQuant8);
    w.put(static_cast<std::uint32_t>(tensors_.size()));
    for (const auto& t : tensors_) {
      w.put(t.scale);
      w.put(t.zeroPoint);
      w.put(static_cast<std::uint64_t>(t.count));
      w.put(static_cast<std::uint32_t>(t.values.size()));
      w.putBytes(t.presence.data(), t.presence.size());
      w.putBytes(t.values.data(), t.values.size());
    }
    w.put(static_cast<std::uint32_t>(biasesFlat_.size()));
    w.putBytes(biasesFlat_.data(), biasesFlat_.size() * sizeof(double));
    w.put(static_cast<std::uint32_t>(logStd_.size()));
    w.putBytes(logStd_.data(), logStd_.size() * sizeof(double));
    w.put(static_cast<std::uint32_t>(activationScales_.size()));
    w.putBytes(activationScales_.data(), activationScales_.size() * sizeof(double));
    return w.bytes;
  }

  static Result<QuantizedPolicy> deserialize(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r{bytes};
    auto arch = detail::readHeader(r, kDtypeQuant8);
    if (!arch) return Result<QuantizedPolicy>::failure(arch.error().message);
    QuantizedPolicy qp;
    qp.arch_ = arch.value();
    const auto tensorCount = r.get<std::uint32_t>();
    if (r.failed || tensorCount != qp.arch_.hidden.size() + 1)
      return Result<QuantizedPolicy>::failure("quantized load: tensor count mismatch");
    for (std::uint32_t i = 0; i < tensorCount; ++i) {
      QuantizedTensor t;
      t.scale = r.get<double>();
      t.zeroPoint = r.get<std::int32_t>();
      t.count = static_cast<std::size_t>(r.get<std::uint64_t>());
      const auto nnz = r.get<std::uint32_t>();
      if (r.failed || t.count > (1u << 28) || nnz > t.count)
        return Result<QuantizedPolicy>::failure("quantized load: corrupt tensor header");
      t.presence.resize((t.count + 7) / 8);
      t.values.resize(nnz);
      if (!r.getBytes(t.presence.data(), t.presence.size()) ||
          !r.getBytes(t.values.data(), t.values.size()))
        return Result<QuantizedPolicy>::failure("quantized load: truncated tensor payload");
      qp.tensors_.push_back(std::move(t));
    }
    const auto biasCount = r.get<std::uint32_t>();
    if (r.failed || biasCount > (1u << 24))
      return Result<QuantizedPolicy>::failure("quantized load: corrupt bias header");
    qp.biasesFlat_.resize(biasCount);
    if (!r.getBytes(qp.biasesFlat_.data(), biasCount * sizeof(double)))
      return Result<QuantizedPolicy>::failure("quantized load: truncated biases");
    const auto lsCount = r.get<std::uint32_t>();
    if (r.failed || lsCount != static_cast<std::uint32_t>(qp.arch_.actionDim))
      return Result<QuantizedPolicy>::failure("quantized load: log-std size mismatch");
    qp.logStd_.resize(lsCount);
    if (!r.getBytes(qp.logStd_.data(), lsCount * sizeof(double)))
      return Result<QuantizedPolicy>::failure("quantized load: truncated log-std");
    const auto asCount = r.get<std::uint32_t>();
    if (r.failed || asCount != qp.arch_.hidden.size() + 1)
      return Result<QuantizedPolicy>::failure("quantized load: activation scale count mismatch");
    qp.activationScales_.resize(asCount);
    if (!r.getBytes(qp.activationScales_.data(), asCount * sizeof(double)))
      return Result<QuantizedPolicy>::failure("quantized load: truncated activation scales");
    if (r.pos != bytes.size())
      return Result<QuantizedPolicy>::failure("quantized load: trailing bytes");
    qp.rebuildDense();
    return qp;
  }

  const std::vector<QuantizedTensor>& tensors() const { return tensors_; }

  friend Result<QuantizedPolicy> prune_and_quantize(const Policy&, double,
                                                    std::span<const std::vector<double>>);

 private:
  void quantizeActivations(std::vector<double>& x, int stage) const {
    const double s = activationScales_[stage];
    for (double& v : x) {
      const double q = std::clamp(std::nearbyint(v / s), -127.0, 127.0);
      v = q * s;
    }
  }

  void rebuildDense() {
    dims_.clear();
    dims_.push_back(arch_.inputDim);
    for (int h : arch_.hidden) dims_.push_back(h);
    dims_.push_back(arch_.actionDim + 1);
    denseWeights_.clear();
    biases_.clear();
    std::size_t biasPos = 0;
    for (std::size_t l = 0; l < tensors_.size(); ++l) {
      const auto& t = tensors_[l];
      std::vector<double> dense(t.count, 0.0);
      std::size_t packed = 0;
      for (std::size_t i = 0; i < t.count; ++i) {
        if (t.presence[i / 8] & (1u << (i % 8))) dense[i] = t.dequant(packed++);
      }
      denseWeights_.push_back(std::move(dense));
      const std::size_t outDim = dims_[l + 1];
      biases_.emplace_back(biasesFlat_.begin() + biasPos, biasesFlat_.begin() + biasPos + outDim);
      biasPos += outDim;
    }
  }

  PolicyArch arch_;
  std::vector<int> dims_;
  std::vector<QuantizedTensor> tensors_;
  std::vector<double> biasesFlat_;
  std::vector<std::vector<double>> biases_;
  std::vector<std::vector<double>> denseWeights_;
  std::vector<double> logStd_;
  std::vector<double> activationScales_;
};

// Magnitude-prunes the smallest `pruneFraction` of each weight tensor, then
// quantizes the survivors to symmetric int8 with per-tensor scales.
// Activation grids are calibrated from the max absolute activation each layer
// sees across `calibrationObs` (falling back to the tanh range when empty).
inline Result<QuantizedPolicy> prune_and_quantize(
    const Policy& policy, double pruneFraction,
    std::span<const std::vector<double>> calibrationObs) {
  if (!(pruneFraction >= 0.0 && pruneFraction < 1.0))
    return Result<QuantizedPolicy>::failure("prune_and_quantize: fraction must be in [0, 1)");

  QuantizedPolicy qp;
  qp.arch_ = policy.arch();
  qp.logStd_.assign(policy.logStd().begin(), policy.logStd().end());

  for (int l = 0; l < policy.layerCount(); ++l) {
    const auto w = policy.weight(l);
    const std::size_t n = w.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(w[a]) < std::abs(w[b]);
    });
    const std::size_t pruneCount = static_cast<std::size_t>(pruneFraction * n);
    std::vector<bool> keep(n, true);
    for (std::size_t i = 0; i < pruneCount; ++i) keep[order[i]] = false;

    double maxAbs = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (keep[i]) maxAbs = std::max(maxAbs, std::abs(w[i]));
    if (maxAbs == 0.0)
      return Result<QuantizedPolicy>::failure(
          "prune_and_quantize: layer " + std::to_string(l) + " left with no nonzero weights");

    QuantizedTensor t;
    t.count = n;
    t.scale = maxAbs / 127.0;
    t.presence.assign((n + 7) / 8, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!keep[i]) continue;
      const double q = std::clamp(std::nearbyint(w[i] / t.scale), -127.0, 127.0);
      if (q == 0.0) continue;  // rounds to zero: drop it from the sparse set
      t.presence[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
      t.values.push_back(static_cast<std::int8_t>(q));
    }
    if (t.values.empty())
      return Result<QuantizedPolicy>::failure(
          "prune_and_quantize: layer " + std::to_string(l) + " left with no nonzero weights");
    qp.tensors_.push_back(std::move(t));

    const auto b = policy.bias(l);
    qp.biasesFlat_.insert(qp.biasesFlat_.end(), b.begin(), b.end());
  }

  // Activation calibration: stage 0 is the observation, stage i>0 the output
  // of hidden layer i.
  const std::size_t stages = policy.arch().hidden.size() + 1;
  std::vector<double> maxAbs(stages, 0.0);
  Workspace ws;
  for (const auto& obs : calibrationObs) {
    for (double v : obs) maxAbs[0] = std::max(maxAbs[0], std::abs(v));
    policy.forward(obs, ws);
    for (std::size_t s = 1; s < stages; ++s)
      for (double v : ws.act[s - 1]) maxAbs[s] = std::max(maxAbs[s], std::abs(v));
  }
  qp.activationScales_.resize(stages);
  for (std::size_t s = 0; s < stages; ++s)
    qp.activationScales_[s] = (maxAbs[s] > 0.0 ? maxAbs[s] : 1.0) / 127.0;

  qp.rebuildDense();
  return qp;
}

}  // namespace padland::nn
