// padland command-line tool: train, evaluate, replay, stream, quantize, and
// a footprint calculator. See README for formats and examples.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "padland/eval/harness.hpp"
#include "padland/geometry.hpp"
#include "padland/io/config.hpp"
#include "padland/nn/model_io.hpp"
#include "padland/nn/quantize.hpp"
#include "padland/rl/landing_env.hpp"
#include "padland/rl/ppo.hpp"
#include "padland/rt/control_loop.hpp"

namespace fs = std::filesystem;
using namespace padland;

namespace {

int fail(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return 1;
}

bool writeText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

struct LoadedPolicy {
  bool quantized = false;
  nn::Policy policy;
  nn::QuantizedPolicy qpolicy;

  std::vector<double> actMean(std::span<const double> obs, nn::Workspace& ws) const {
    return quantized ? qpolicy.actMean(obs, ws) : policy.actMean(obs, ws);
  }
};

Result<LoadedPolicy> loadPolicyFile(const std::string& path) {
  auto bytes = nn::load_file(path);
  if (!bytes.ok()) return Result<LoadedPolicy>::failure(bytes.error().message);
  LoadedPolicy lp;
  if (auto p = nn::load(bytes.value()); p.ok()) {
    lp.policy = std::move(p.value());
    return lp;
  }
  auto q = nn::QuantizedPolicy::deserialize(bytes.value());
  if (!q.ok()) return Result<LoadedPolicy>::failure(q.error().message);
  lp.quantized = true;
  lp.qpolicy = std::move(q.value());
  return lp;
}

int runTrain(const std::string& configPath, std::uint64_t seed, bool seedSet,
             const std::string& outDir, long stepsOverride) {
  auto configResult = io::load_config(configPath);
  if (!configResult.ok()) return fail(configResult.error().message);
  io::AppConfig app = std::move(configResult.value());
  if (seedSet) app.train.seed = seed;
  if (stepsOverride >= 0) app.train.totalSteps = stepsOverride;

  fs::create_directories(outDir);
  std::vector<rl::LandingEnv> envs;
  envs.reserve(app.train.numEnvs);
  for (int e = 0; e < app.train.numEnvs; ++e) {
    envs.emplace_back(app.sim, app.reward, app.bounds,
                      Rng(app.train.seed).fork(100 + e).nextU64(), app.holdLastFrames);
  }

  auto onIteration = [](const rl::IterationLog& log) {
    std::cout << "iter " << log.iteration << " steps " << log.steps << " reward "
              << log.meanEpisodeReward << " success " << log.successRate << " kl "
              << log.update.approxKl << "\n";
  };
  auto onCheckpoint = [&](const nn::Policy& policy, int iteration) {
    char name[64];
    std::snprintf(name, sizeof(name), "checkpoint_%05d.bin", iteration);
    nn::save_file((fs::path(outDir) / name).string(), nn::save(policy));
  };

  const rl::TrainResult result = rl::train(app.train, envs, onIteration, onCheckpoint);
  if (!nn::save_file((fs::path(outDir) / "policy.bin").string(), nn::save(result.policy)))
    return fail("cannot write policy.bin");
  if (!writeText(fs::path(outDir) / "curve.csv", rl::training_curve_csv(result.curve)))
    return fail("cannot write curve.csv");
  if (result.aborted) return fail("training aborted: " + result.diagnostics);
  std::cout << "trained " << result.totalSteps << " steps; policy written to " << outDir
            << "/policy.bin\n";
  return 0;
}

int runEvaluate(const std::string& configPath, const std::string& policyPath, std::uint64_t seed,
                bool seedSet, int episodes, const std::string& outDir) {
  auto configResult = io::load_config(configPath);
  if (!configResult.ok()) return fail(configResult.error().message);
  io::AppConfig app = std::move(configResult.value());
  if (seedSet) app.eval.seed = seed;
  if (episodes > 0) app.eval.runs = episodes;

  auto policy = loadPolicyFile(policyPath);
  if (!policy.ok()) return fail(policy.error().message);

  std::vector<eval::RunLog> logs;
  const eval::EvalReport report = eval::run_evaluation(policy.value(), app.eval, &logs);

  if (!outDir.empty()) {
    fs::create_directories(fs::path(outDir) / "events");
    fs::create_directories(fs::path(outDir) / "commands");
    fs::create_directories(fs::path(outDir) / "trajectories");
    for (std::size_t i = 0; i < logs.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "run_%03zu.log", i);
      writeText(fs::path(outDir) / "events" / name, logs[i].events);
      writeText(fs::path(outDir) / "commands" / name, logs[i].commands);
      writeText(fs::path(outDir) / "trajectories" / name, logs[i].trajectory);
    }
    writeText(fs::path(outDir) / "report.csv", eval::report_csv(report));
    writeText(fs::path(outDir) / "summary.txt", eval::summarize(report));
  }
  std::cout << eval::summarize(report);
  return 0;
}

int runStream(const std::string& policyPath, const std::string& inPath,
              const std::string& outPath, double fps, const std::string& configPath) {
  auto configResult = io::load_config(configPath);
  if (!configResult.ok()) return fail(configResult.error().message);
  auto policy = loadPolicyFile(policyPath);
  if (!policy.ok()) return fail(policy.error().message);

  rt::LoopConfig loopCfg;
  loopCfg.camera = configResult.value().sim.camera;
  loopCfg.bounds = configResult.value().bounds;
  loopCfg.holdLastFrames = configResult.value().holdLastFrames;
  loopCfg.gimbalSlewDegPerS = configResult.value().sim.control.gimbalSlewDegPerS;
  if (fps > 0.0) loopCfg.nominalPeriodS = 1.0 / fps;

  std::ifstream fileIn;
  std::ofstream fileOut;
  std::istream* in = &std::cin;
  std::ostream* out = &std::cout;
  if (!inPath.empty()) {
    fileIn.open(inPath);
    if (!fileIn) return fail("cannot open " + inPath);
    in = &fileIn;
  }
  if (!outPath.empty()) {
    fileOut.open(outPath, std::ios::trunc);
    if (!fileOut) return fail("cannot open " + outPath);
    out = &fileOut;
  }

  const auto stats = rt::run_stream(*in, *out, policy.value(), loopCfg);
  if (!stats.ok()) return fail(stats.error().message);
  std::cerr << "events " << stats.value().eventsConsumed << " commands "
            << stats.value().commandsEmitted << " mean_latency_us " << stats.value().meanLatencyUs
            << " p99_latency_us " << stats.value().p99LatencyUs << " final_phase "
            << rt::to_string(stats.value().finalPhase) << "\n";
  return 0;
}

int runQuantize(const std::string& policyPath, const std::string& outPath, double pruneFraction,
                int calibrationSamples, std::uint64_t seed) {
  auto bytes = nn::load_file(policyPath);
  if (!bytes.ok()) return fail(bytes.error().message);
  auto policy = nn::load(bytes.value());
  if (!policy.ok()) return fail(policy.error().message);

  Rng rng(seed);
  std::vector<std::vector<double>> calibration;
  calibration.reserve(calibrationSamples);
  for (int i = 0; i < calibrationSamples; ++i) {
    std::vector<double> obs(policy.value().arch().inputDim);
    for (auto& v : obs) v = rng.uniform(-1.0, 1.0);
    calibration.push_back(std::move(obs));
  }

  auto quantized = nn::prune_and_quantize(policy.value(), pruneFraction, calibration);
  if (!quantized.ok()) return fail(quantized.error().message);
  const auto qbytes = quantized.value().serialize();
  if (!nn::save_file(outPath, qbytes)) return fail("cannot write " + outPath);

  const double reduction =
      100.0 * (1.0 - static_cast<double>(qbytes.size()) / bytes.value().size());
  std::cout << "float bytes " << bytes.value().size() << " quantized bytes " << qbytes.size()
            << " reduction " << reduction << "%\n";
  return 0;
}

int runFootprint(double heightM, double fps, int width, int height, double hfov, double vfov) {
  geom::CameraModel cam = geom::CameraModel::defaults();
  cam.imageWidth = width;
  cam.imageHeight = height;
  if (hfov > 0.0) cam.hfovDeg = hfov;
  if (vfov > 0.0) cam.vfovDeg = vfov;
  try {
    const geom::Footprint fp = geom::camera_footprint(heightM, cam);
    std::cout << "footprint_m " << fp.widthM << " x " << fp.lengthM << "\n";
    if (fps > 0.0)
      std::cout << "max_undetectable_speed_mps " << geom::max_undetectable_speed(fp.widthM, fps)
                << "\n";
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"padland: vision-guided moving-platform landing toolkit"};
  app.require_subcommand(1);

  std::string configPath, policyPath, outDir, inPath, outPath;
  std::uint64_t seed = 0;
  long steps = -1;
  int episodes = 0;
  double fps = 8.0;
  double pruneFraction = 0.25;
  int calibrationSamples = 256;
  double heightM = 5.0;
  int camWidth = 800, camHeight = 600;
  double hfov = 0.0, vfov = 0.0;

  auto* trainCmd = app.add_subcommand("train", "train a landing policy");
  trainCmd->add_option("--config", configPath, "JSON config file");
  auto* trainSeed = trainCmd->add_option("--seed", seed, "training seed");
  trainCmd->add_option("--out", outDir, "output directory")->required();
  trainCmd->add_option("--steps", steps, "override total training steps");

  auto* evalCmd = app.add_subcommand("evaluate", "run the landing evaluation protocol");
  evalCmd->add_option("--config", configPath, "JSON config file");
  evalCmd->add_option("--policy", policyPath, "policy file")->required();
  auto* evalSeed = evalCmd->add_option("--seed", seed, "evaluation seed");
  evalCmd->add_option("--episodes", episodes, "number of runs");
  evalCmd->add_option("--out", outDir, "output directory for report and logs");

  auto* replayCmd = app.add_subcommand("replay", "replay a recorded event log through a policy");
  replayCmd->add_option("--policy", policyPath, "policy file")->required();
  replayCmd->add_option("--in", inPath, "detection event log")->required();
  replayCmd->add_option("--out", outPath, "command output file (stdout if omitted)");
  replayCmd->add_option("--config", configPath, "JSON config file");
  replayCmd->add_option("--fps", fps, "nominal frame rate");

  auto* streamCmd = app.add_subcommand("stream", "stdin events -> stdout commands");
  streamCmd->add_option("--policy", policyPath, "policy file")->required();
  streamCmd->add_option("--config", configPath, "JSON config file");
  streamCmd->add_option("--fps", fps, "nominal frame rate");

  auto* quantCmd = app.add_subcommand("quantize", "prune + quantize a float policy");
  quantCmd->add_option("--policy", policyPath, "float policy file")->required();
  quantCmd->add_option("--out", outPath, "quantized output file")->required();
  quantCmd->add_option("--prune", pruneFraction, "prune fraction [0,1)");
  quantCmd->add_option("--calibration-samples", calibrationSamples, "calibration sample count");
  quantCmd->add_option("--seed", seed, "calibration seed");

  auto* footCmd = app.add_subcommand("footprint", "camera ground footprint calculator");
  footCmd->add_option("--height", heightM, "altitude in meters");
  footCmd->add_option("--fps", fps, "processed frame rate");
  footCmd->add_option("--image-width", camWidth, "image width in pixels");
  footCmd->add_option("--image-height", camHeight, "image height in pixels");
  footCmd->add_option("--hfov", hfov, "horizontal FOV in degrees");
  footCmd->add_option("--vfov", vfov, "vertical FOV in degrees");

  CLI11_PARSE(app, argc, argv);

  try {
    if (trainCmd->parsed())
      return runTrain(configPath, seed, trainSeed->count() > 0, outDir, steps);
    if (evalCmd->parsed())
      return runEvaluate(configPath, policyPath, seed, evalSeed->count() > 0, episodes, outDir);
    if (replayCmd->parsed()) return runStream(policyPath, inPath, outPath, fps, configPath);
    if (streamCmd->parsed()) return runStream(policyPath, "", "", fps, configPath);
    if (quantCmd->parsed())
      return runQuantize(policyPath, outPath, pruneFraction, calibrationSamples, seed);
    if (footCmd->parsed()) return runFootprint(heightM, fps, camWidth, camHeight, hfov, vfov);
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  return 0;
}
