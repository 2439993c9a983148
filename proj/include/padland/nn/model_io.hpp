// Versioned binary model format, shared by float and quantized policies.
//
// Layout (little-endian):
//   u32 magic 'PAD1' (0x31444150), u16 version, u8 dtype, u8 reserved
//   u32 inputDim, u32 hiddenCount, u32 hidden[...], u32 actionDim
//   dtype 0 (float64): the flat parameter vector as raw doubles
//   dtype 1 (quant8):  see quantize.hpp for the tensor encoding
// Float round trips are bit-exact. Truncated or mismatched payloads load as
// errors, never crashes.
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "padland/nn/policy.hpp"
#include "padland/result.hpp"

namespace padland::nn {

constexpr std::uint32_t kModelMagic = 0x31444150;  // "PAD1"
constexpr std::uint16_t kModelVersion = 1;
constexpr std::uint8_t kDtypeFloat64 = 0;
constexpr std::uint8_t kDtypeQuant8 = 1;

namespace detail {

struct ByteWriter {
  std::vector<std::uint8_t> bytes;

  template <typename T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  void putBytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes.insert(bytes.end(), p, p + n);
  }
};

struct ByteReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
  bool failed = false;

  template <typename T>
  T get() {
    T v{};
    if (pos + sizeof(T) > bytes.size()) {
      failed = true;
      return v;
    }
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  bool getBytes(void* out, std::size_t n) {
    if (pos + n > bytes.size()) {
      failed = true;
      return false;
    }
    std::memcpy(out, bytes.data() + pos, n);
    pos += n;
    return true;
  }
};

inline void writeHeader(ByteWriter& w, const PolicyArch& arch, std::uint8_t dtype) {
  w.put(kModelMagic);
  w.put(kModelVersion);
  w.put(dtype);
  w.put(std::uint8_t{0});
  w.put(static_cast<std::uint32_t>(arch.inputDim));
  w.put(static_cast<std::uint32_t>(arch.hidden.size()));
  for (int h : arch.hidden) w.put(static_cast<std::uint32_t>(h));
  w.put(static_cast<std::uint32_t>(arch.actionDim));
}

inline Result<PolicyArch> readHeader(ByteReader& r, std::uint8_t expectedDtype) {
  const auto magic = r.get<std::uint32_t>();
  if (r.failed || magic != kModelMagic)
    return Result<PolicyArch>::failure("model load: bad magic, not a policy file");
  const auto version = r.get<std::uint16_t>();
  if (r.failed || version != kModelVersion)
    return Result<PolicyArch>::failure("model load: unsupported version " + std::to_string(version));
  const auto dtype = r.get<std::uint8_t>();
  r.get<std::uint8_t>();
  if (r.failed) return Result<PolicyArch>::failure("model load: truncated header");
  if (dtype != expectedDtype)
    return Result<PolicyArch>::failure("model load: dtype mismatch (file has " +
                                       std::to_string(int(dtype)) + ")");
  PolicyArch arch;
  arch.inputDim = static_cast<int>(r.get<std::uint32_t>());
  const auto hiddenCount = r.get<std::uint32_t>();
  if (r.failed || hiddenCount == 0 || hiddenCount > 64)
    return Result<PolicyArch>::failure("model load: invalid hidden layer count");
  arch.hidden.clear();
  for (std::uint32_t i = 0; i < hiddenCount; ++i)
    arch.hidden.push_back(static_cast<int>(r.get<std::uint32_t>()));
  arch.actionDim = static_cast<int>(r.get<std::uint32_t>());
  if (r.failed) return Result<PolicyArch>::failure("model load: truncated architecture block");
  if (arch.inputDim <= 0 || arch.inputDim > 4096 || arch.actionDim <= 0 || arch.actionDim > 4096)
    return Result<PolicyArch>::failure("model load: implausible architecture");
  for (int h : arch.hidden)
    if (h <= 0 || h > 65536) return Result<PolicyArch>::failure("model load: implausible hidden size");
  return arch;
}

}  // namespace detail

inline std::vector<std::uint8_t> save(const Policy& policy) {
  detail::ByteWriter w;
  detail::writeHeader(w, policy.arch(), kDtypeFloat64);
  w.putBytes(policy.params().data(), policy.params().size() * sizeof(double));
  return w.bytes;
}

inline Result<Policy> load(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r{bytes};
  auto arch = detail::readHeader(r, kDtypeFloat64);
  if (!arch) return Result<Policy>::failure(arch.error().message);
  Policy policy(arch.value());
  if (!r.getBytes(policy.params().data(), policy.params().size() * sizeof(double)))
    return Result<Policy>::failure("model load: truncated parameter payload");
  if (r.pos != bytes.size())
    return Result<Policy>::failure("model load: trailing bytes after payload");
  if (!policy.healthy()) return Result<Policy>::failure("model load: non-finite parameters");
  return policy;
}

inline bool save_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  return static_cast<bool>(out);
}

inline Result<std::vector<std::uint8_t>> load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return Result<std::vector<std::uint8_t>>::failure("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace padland::nn
