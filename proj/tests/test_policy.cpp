#include "padland/nn/policy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "padland/nn/model_io.hpp"
#include "padland/nn/quantize.hpp"
#include "padland/rng.hpp"

using namespace padland;
using nn::ActionDistribution;
using nn::Policy;
using nn::PolicyArch;

namespace {

std::vector<double> randomObs(int dim, Rng& rng) {
  std::vector<double> obs(dim);
  for (auto& v : obs) v = rng.uniform(-1.0, 1.0);
  return obs;
}

double gaussianCdf(double x, double mean, double stddev) {
  return 0.5 * std::erfc(-(x - mean) / (stddev * std::sqrt(2.0)));
}

}  // namespace

TEST(Forward, DeterministicBitIdentical) {
  const Policy policy = Policy::randomInit(PolicyArch{}, 7);
  Rng rng(1);
  const auto obs = randomObs(3, rng);
  nn::Workspace a, b;
  policy.forward(obs, a);
  policy.forward(obs, b);
  EXPECT_EQ(std::memcmp(a.mean.data(), b.mean.data(), a.mean.size() * sizeof(double)), 0);
  EXPECT_EQ(std::memcmp(&a.value, &b.value, sizeof(double)), 0);
}

TEST(Forward, ZeroFinalLayerGivesZeroMean) {
  Policy policy = Policy::randomInit(PolicyArch{}, 3);
  const int last = policy.layerCount() - 1;
  for (auto& w : policy.weight(last)) w = 0.0;
  for (auto& b : policy.bias(last)) b = 0.0;
  Rng rng(2);
  nn::Workspace ws;
  for (int i = 0; i < 50; ++i) {
    policy.forward(randomObs(3, rng), ws);
    for (double m : ws.mean) EXPECT_DOUBLE_EQ(m, 0.0);
    EXPECT_DOUBLE_EQ(ws.value, 0.0);
  }
}

TEST(Forward, RejectsBadObservations) {
  const Policy policy = Policy::randomInit(PolicyArch{}, 7);
  nn::Workspace ws;
  std::vector<double> wrongSize(2, 0.0);
  EXPECT_THROW(policy.forward(wrongSize, ws), std::invalid_argument);
  std::vector<double> nan(3, std::numeric_limits<double>::quiet_NaN());
  EXPECT_THROW(policy.forward(nan, ws), std::invalid_argument);
}

TEST(Forward, HealthyAfterRandomInit) {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 99ull}) {
    EXPECT_TRUE(Policy::randomInit(PolicyArch{}, seed).healthy());
  }
}

TEST(SampleAction, StdZeroLimitIsTanhMean) {
  ActionDistribution dist;
  dist.mean = {0.4, -1.2, 2.0, 0.0};
  dist.std = {1e-12, 1e-12, 1e-12, 1e-12};
  Rng rng(5);
  const auto s = nn::sample_action(dist, rng);
  for (std::size_t j = 0; j < dist.mean.size(); ++j)
    EXPECT_NEAR(s.action[j], std::tanh(dist.mean[j]), 1e-9);
}

TEST(SampleAction, LogProbConsistentWithLogProbFunction) {
  ActionDistribution dist;
  dist.mean = {0.2, -0.5, 1.0, 0.0};
  dist.std = {0.6, 0.3, 1.1, 0.8};
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const auto s = nn::sample_action(dist, rng);
    const double lp = nn::log_prob(dist, s.action);
    EXPECT_EQ(std::memcmp(&s.logProb, &lp, sizeof(double)), 0);  // exact, same code path
  }
}

TEST(SampleAction, AlwaysStrictlyInsideUnitBox) {
  ActionDistribution dist;
  dist.mean = {50.0, -50.0, 0.0, 3.0};
  dist.std = {100.0, 100.0, 0.01, 40.0};
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const auto s = nn::sample_action(dist, rng);
    for (double a : s.action) {
      EXPECT_LT(std::abs(a), 1.0);
      EXPECT_LE(std::abs(a), 1.0 - 1e-6 + 1e-15);
    }
  }
}

TEST(SampleAction, PreSquashSampleMeanMatchesDistMean) {
  ActionDistribution dist;
  dist.mean = {0.3};
  dist.std = {0.5};
  Rng rng(8);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto s = nn::sample_action(dist, rng);
    sum += std::atanh(s.action[0]);
  }
  const double tolerance = 3.0 * dist.std[0] / std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(sum / n, dist.mean[0], tolerance);
}

TEST(LogProb, DensityIntegratesToOne) {
  // Quadrature oracle over the 1-D squashed density.
  ActionDistribution dist;
  dist.mean = {0.3};
  dist.std = {0.8};
  const int n = 200001;
  const double lo = -1.0 + 1e-9, hi = 1.0 - 1e-9;
  const double h = (hi - lo) / (n - 1);
  double integral = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = lo + i * h;
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    integral += w * std::exp(nn::log_prob(dist, std::vector<double>{a}));
  }
  integral *= h;
  EXPECT_NEAR(integral, 1.0, 1e-4);
}

TEST(LogProb, SymmetricAboutZeroMean) {
  ActionDistribution dist;
  dist.mean = {0.0, 0.0};
  dist.std = {0.7, 0.7};
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> a{rng.uniform(-0.99, 0.99), rng.uniform(-0.99, 0.99)};
    const std::vector<double> neg{-a[0], -a[1]};
    EXPECT_NEAR(nn::log_prob(dist, a), nn::log_prob(dist, neg), 1e-12);
  }
}

TEST(LogProb, MatchesFiniteDifferenceOfCdf) {
  // d/da P(A <= a) must equal the density; the CDF of the squashed variable
  // is the Gaussian CDF at atanh(a).
  ActionDistribution dist;
  dist.mean = {0.25};
  dist.std = {0.6};
  for (double a : {-0.8, -0.3, 0.0, 0.2, 0.55, 0.9}) {
    const double h = 1e-6;
    const double cdfHi = gaussianCdf(std::atanh(a + h), dist.mean[0], dist.std[0]);
    const double cdfLo = gaussianCdf(std::atanh(a - h), dist.mean[0], dist.std[0]);
    const double numeric = (cdfHi - cdfLo) / (2.0 * h);
    const double analytic = std::exp(nn::log_prob(dist, std::vector<double>{a}));
    EXPECT_NEAR(numeric / analytic, 1.0, 1e-4) << "a = " << a;
  }
}

TEST(Gradients, LogProbAndValueMatchFiniteDifferences) {
  // Full-chain gradient check through the trunk on a small instance.
  PolicyArch arch;
  arch.inputDim = 2;
  arch.hidden = {8, 6};
  arch.actionDim = 3;
  Policy policy = Policy::randomInit(arch, 11);
  Rng rng(12);
  const auto obs = randomObs(2, rng);
  const std::vector<double> action{0.3, -0.6, 0.1};

  auto logProbOf = [&](const Policy& p) {
    nn::Workspace ws;
    return nn::log_prob(p.dist(obs, ws), action);
  };
  auto valueOf = [&](const Policy& p) { return p.value(obs); };

  // Analytic gradient of log_prob w.r.t. every parameter.
  nn::Workspace ws;
  const ActionDistribution dist = policy.dist(obs, ws);
  std::vector<double> grad(policy.paramCount(), 0.0);
  std::vector<double> dMean(arch.actionDim);
  const std::size_t logStdBase = policy.paramCount() - arch.actionDim;
  for (int j = 0; j < arch.actionDim; ++j) {
    const double u = std::atanh(action[j]);
    const double z = (u - dist.mean[j]) / dist.std[j];
    dMean[j] = z / dist.std[j];
    grad[logStdBase + j] = z * z - 1.0;
  }
  policy.backward(obs, ws, dMean, 0.0, grad);

  const double h = 1e-6;
  Policy probe = policy;
  int checkedLp = 0;
  for (std::size_t k = 0; k < policy.paramCount(); k += 3) {
    const double saved = probe.params()[k];
    probe.params()[k] = saved + h;
    const double hi = logProbOf(probe);
    probe.params()[k] = saved - h;
    const double lo = logProbOf(probe);
    probe.params()[k] = saved;
    const double numeric = (hi - lo) / (2.0 * h);
    if (std::abs(numeric) < 1e-7 && std::abs(grad[k]) < 1e-7) continue;
    EXPECT_NEAR(grad[k] / numeric, 1.0, 1e-4) << "param " << k;
    checkedLp += 1;
  }
  EXPECT_GT(checkedLp, 25);

  // Value head gradient.
  std::fill(grad.begin(), grad.end(), 0.0);
  std::fill(dMean.begin(), dMean.end(), 0.0);
  policy.forward(obs, ws);
  policy.backward(obs, ws, dMean, 1.0, grad);
  int checkedV = 0;
  for (std::size_t k = 0; k < policy.paramCount(); k += 3) {
    const double saved = probe.params()[k];
    probe.params()[k] = saved + h;
    const double hi = valueOf(probe);
    probe.params()[k] = saved - h;
    const double lo = valueOf(probe);
    probe.params()[k] = saved;
    const double numeric = (hi - lo) / (2.0 * h);
    if (std::abs(numeric) < 1e-7 && std::abs(grad[k]) < 1e-7) continue;
    EXPECT_NEAR(grad[k] / numeric, 1.0, 1e-4) << "param " << k;
    checkedV += 1;
  }
  EXPECT_GT(checkedV, 25);
}

TEST(ModelIo, SaveLoadSaveIsIdentity) {
  const Policy policy = Policy::randomInit(PolicyArch{}, 21);
  const auto bytes = nn::save(policy);
  auto loaded = nn::load(bytes);
  ASSERT_TRUE(loaded.ok());
  const auto again = nn::save(loaded.value());
  EXPECT_EQ(bytes, again);
}

TEST(ModelIo, DefaultArchitectureStaysUnderSizeBudget) {
  const Policy policy = Policy::randomInit(PolicyArch{}, 22);
  EXPECT_LT(nn::save(policy).size(), 100u * 1024u);
}

TEST(ModelIo, CorruptPayloadsAreErrorsNotCrashes) {
  const Policy policy = Policy::randomInit(PolicyArch{}, 23);
  auto bytes = nn::save(policy);

  auto truncated = bytes;
  truncated.resize(truncated.size() / 2);
  EXPECT_FALSE(nn::load(truncated).ok());

  auto badMagic = bytes;
  badMagic[0] ^= 0xFF;
  EXPECT_FALSE(nn::load(badMagic).ok());

  auto badVersion = bytes;
  badVersion[4] = 0x7F;
  EXPECT_FALSE(nn::load(badVersion).ok());

  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_FALSE(nn::load(trailing).ok());

  EXPECT_FALSE(nn::load(std::vector<std::uint8_t>{}).ok());
}

TEST(Quantize, DequantizedWeightsWithinOneStep) {
  const Policy policy = Policy::randomInit(PolicyArch{}, 31);
  auto qp = nn::prune_and_quantize(policy, 0.0, {});
  ASSERT_TRUE(qp.ok());
  for (int l = 0; l < policy.layerCount(); ++l) {
    const auto& tensor = qp.value().tensors()[l];
    const auto w = policy.weight(l);
    std::size_t packed = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (tensor.presence[i / 8] & (1u << (i % 8))) {
        const double dq = tensor.dequant(packed++);
        EXPECT_LE(std::abs(dq - w[i]), tensor.scale + 1e-15);
      } else {
        // Absent at fraction 0 only happens when the weight rounds to zero.
        EXPECT_LE(std::abs(w[i]), tensor.scale);
      }
    }
  }
}

TEST(Quantize, QuantOnlyForwardStaysClose) {
  const Policy policy = Policy::randomInit(PolicyArch{}, 32);
  Rng rng(33);
  std::vector<std::vector<double>> calibration;
  for (int i = 0; i < 64; ++i) calibration.push_back(randomObs(3, rng));
  auto qp = nn::prune_and_quantize(policy, 0.0, calibration);
  ASSERT_TRUE(qp.ok());

  nn::Workspace wsF, wsQ;
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto obs = randomObs(3, rng);
    const auto af = policy.actMean(obs, wsF);
    const auto aq = qp.value().actMean(obs, wsQ);
    for (std::size_t j = 0; j < af.size(); ++j)
      worst = std::max(worst, std::abs(af[j] - aq[j]));
  }
  EXPECT_LT(worst, 0.25);
}

TEST(Quantize, DefaultPipelineShrinksEightyPercent) {
  const Policy policy = Policy::randomInit(PolicyArch{}, 34);
  Rng rng(35);
  std::vector<std::vector<double>> calibration;
  for (int i = 0; i < 128; ++i) calibration.push_back(randomObs(3, rng));
  auto qp = nn::prune_and_quantize(policy, 0.25, calibration);
  ASSERT_TRUE(qp.ok());
  const auto qbytes = qp.value().serialize();
  const auto fbytes = nn::save(policy);
  EXPECT_LE(qbytes.size(), fbytes.size() * 0.20);  // at least 80% smaller
  EXPECT_LE(qbytes.size(), fbytes.size() * 0.30);  // quantized-size invariant
}

TEST(Quantize, MeanActionDeviationUnderFivePercent) {
  const Policy policy = Policy::randomInit(PolicyArch{}, 36);
  Rng rng(37);
  std::vector<std::vector<double>> calibration;
  for (int i = 0; i < 256; ++i) calibration.push_back(randomObs(3, rng));
  auto qp = nn::prune_and_quantize(policy, 0.25, calibration);
  ASSERT_TRUE(qp.ok());

  nn::Workspace wsF, wsQ;
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto obs = randomObs(3, rng);
    const auto af = policy.actMean(obs, wsF);
    const auto aq = qp.value().actMean(obs, wsQ);
    for (std::size_t j = 0; j < af.size(); ++j) {
      sum += std::abs(af[j] - aq[j]);
      count += 1;
    }
  }
  EXPECT_LE(sum / count, 0.05);
}

TEST(Quantize, PruningMonotonicity) {
  const Policy policy = Policy::randomInit(PolicyArch{}, 38);
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  for (double fraction : {0.0, 0.2, 0.5, 0.8}) {
    auto qp = nn::prune_and_quantize(policy, fraction, {});
    ASSERT_TRUE(qp.ok());
    const std::size_t nnz = qp.value().nonzeroWeightCount();
    EXPECT_LE(nnz, prev);
    prev = nnz;
  }
}

TEST(Quantize, RejectsBadInputs) {
  const Policy policy = Policy::randomInit(PolicyArch{}, 39);
  EXPECT_FALSE(nn::prune_and_quantize(policy, 1.0, {}).ok());
  EXPECT_FALSE(nn::prune_and_quantize(policy, -0.1, {}).ok());

  const Policy zeros{PolicyArch{}};  // all-zero weights cannot be quantized
  EXPECT_FALSE(nn::prune_and_quantize(zeros, 0.0, {}).ok());
}

TEST(Quantize, SerializeRoundTripPreservesInference) {
  const Policy policy = Policy::randomInit(PolicyArch{}, 40);
  Rng rng(41);
  std::vector<std::vector<double>> calibration;
  for (int i = 0; i < 64; ++i) calibration.push_back(randomObs(3, rng));
  auto qp = nn::prune_and_quantize(policy, 0.3, calibration);
  ASSERT_TRUE(qp.ok());

  const auto bytes = qp.value().serialize();
  auto restored = nn::QuantizedPolicy::deserialize(bytes);
  ASSERT_TRUE(restored.ok());
  EXPECT_EQ(restored.value().serialize(), bytes);

  nn::Workspace a, b;
  for (int i = 0; i < 100; ++i) {
    const auto obs = randomObs(3, rng);
    const auto ma = qp.value().actMean(obs, a);
    const auto mb = restored.value().actMean(obs, b);
    EXPECT_EQ(std::memcmp(ma.data(), mb.data(), ma.size() * sizeof(double)), 0);
  }

  auto truncated = bytes;
  truncated.resize(truncated.size() - 9);
  EXPECT_FALSE(nn::QuantizedPolicy::deserialize(truncated).ok());
}
