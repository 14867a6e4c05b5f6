#include "dsts/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dsts/error.hpp"
#include "dsts/parallel.hpp"

namespace dsts {

EngineConfig default_config() {
  EngineConfig config;
  config.threads = default_thread_count();
  return config;
}

const char* to_string(WeightMode mode) {
  return mode == WeightMode::kNormalized ? "normalized" : "raw";
}

const char* to_string(NormalizationScope scope) {
  return scope == NormalizationScope::kPerLocation ? "per-location" : "whole-map";
}

WeightMode parse_weight_mode(const std::string& text) {
  if (text == "normalized") return WeightMode::kNormalized;
  if (text == "raw") return WeightMode::kRaw;
  throw Error(ErrorCode::kInvalidArgument, "weight mode must be 'normalized' or 'raw'");
}

NormalizationScope parse_normalization_scope(const std::string& text) {
  if (text == "per-location") return NormalizationScope::kPerLocation;
  if (text == "whole-map") return NormalizationScope::kWholeMap;
  throw Error(ErrorCode::kInvalidArgument,
              "normalization scope must be 'per-location' or 'whole-map'");
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(const std::string& value, const std::string& key) {
  if (value.size() < 2 || value.front() != '"' || value.back() != '"') {
    throw Error(ErrorCode::kInvalidArgument, "config key '" + key + "' expects a quoted string");
  }
  return value.substr(1, value.size() - 2);
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::kInvalidArgument, "config key '" + key + "' has bad value '" + value + "'");
  }
  return out;
}

}  // namespace

std::string to_toml(const EngineConfig& c) {
  std::ostringstream os;
  os << "window_k = " << c.window_k << "\n"
     << "window_l = " << c.window_l << "\n"
     << "window_sigma = " << format_double(c.window_sigma) << "\n"
     << "lambda = " << format_double(c.lambda) << "\n"
     << "weight_mode = \"" << to_string(c.weight_mode) << "\"\n"
     << "normalization_scope = \"" << to_string(c.normalization_scope) << "\"\n"
     << "shape_backbone = \"" << c.shape_backbone << "\"\n"
     << "texture_backbone = \"" << c.texture_backbone << "\"\n"
     << "threads = " << c.threads << "\n"
     << "seed = " << c.seed << "\n"
     << "max_condition = " << format_double(c.max_condition) << "\n";
  return os.str();
}

EngineConfig parse_toml(const std::string& text, EngineConfig config) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Comments only outside quotes; values here never contain '#'.
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "config line " + std::to_string(lineno) +
                                                   " is not 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "window_k") config.window_k = parse_number<int>(value, key);
    else if (key == "window_l") config.window_l = parse_number<int>(value, key);
    else if (key == "window_sigma") config.window_sigma = parse_number<double>(value, key);
    else if (key == "lambda") config.lambda = parse_number<double>(value, key);
    else if (key == "weight_mode") config.weight_mode = parse_weight_mode(unquote(value, key));
    else if (key == "normalization_scope")
      config.normalization_scope = parse_normalization_scope(unquote(value, key));
    else if (key == "shape_backbone") config.shape_backbone = unquote(value, key);
    else if (key == "texture_backbone") config.texture_backbone = unquote(value, key);
    else if (key == "threads") config.threads = parse_number<unsigned>(value, key);
    else if (key == "seed") config.seed = parse_number<std::uint64_t>(value, key);
    else if (key == "max_condition") config.max_condition = parse_number<double>(value, key);
    else throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
  }
  if (config.threads == 0) config.threads = default_thread_count();
  return config;
}

void save_config(const EngineConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << to_toml(config);
}

EngineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

}  // namespace dsts
