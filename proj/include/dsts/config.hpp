#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dsts/distance.hpp"
#include "dsts/statistics.hpp"

namespace dsts {

struct EngineConfig {
  int window_k = 3;
  int window_l = 3;
  double window_sigma = 7.0 / 6.0;
  double lambda = kDefaultLambda;
  WeightMode weight_mode = WeightMode::kNormalized;
  NormalizationScope normalization_scope = NormalizationScope::kPerLocation;
  // "filterbank" or a path to an ONNX model with its sidecar.
  std::string shape_backbone = "filterbank";
  std::string texture_backbone = "filterbank";
  unsigned threads = 1;
  std::uint64_t seed = 20240601;
  // Outer statistics whose regularized covariance exceeds this are rejected.
  double max_condition = 1e12;

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

// Defaults with the thread count taken from DSTS_THREADS / hardware.
EngineConfig default_config();

const char* to_string(WeightMode mode);
const char* to_string(NormalizationScope scope);
WeightMode parse_weight_mode(const std::string& text);
NormalizationScope parse_normalization_scope(const std::string& text);

// Flat TOML subset: `key = value` lines, '#' comments, quoted strings.
std::string to_toml(const EngineConfig& config);
EngineConfig parse_toml(const std::string& text, EngineConfig base = default_config());

void save_config(const EngineConfig& config, const std::filesystem::path& path);
EngineConfig load_config(const std::filesystem::path& path);

}  // namespace dsts
