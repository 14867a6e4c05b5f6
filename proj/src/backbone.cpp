#include "dsts/backbone.hpp"

#include <zlib.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <mutex>
#include "json.hpp"
#include <opencv2/dnn.hpp>
#include <sstream>

#include "dsts/error.hpp"

namespace dsts {

const char* to_string(BackboneKind kind) {
  switch (kind) {
    case BackboneKind::kShape: return "shape";
    case BackboneKind::kTexture: return "texture";
    case BackboneKind::kFilterbank: return "filterbank";
  }
  return "unknown";
}

BackboneKind parse_backbone_kind(const std::string& text) {
  if (text == "shape") return BackboneKind::kShape;
  if (text == "texture") return BackboneKind::kTexture;
  if (text == "filterbank") return BackboneKind::kFilterbank;
  throw Error(ErrorCode::kInvalidArgument, "unknown backbone kind '" + text + "'");
}

FeatureStack extract_features(const RgbImage& image, const Backbone& backbone) {
  FeatureStack stack = backbone.extract(image);
  for (std::size_t i = 0; i < kTapCount; ++i) {
    if (stack.taps[i].channels() != backbone.taps()[i].channels) {
      throw Error(ErrorCode::kInferenceFailure,
                  "stage " + std::to_string(i + 1) + " produced " +
                      std::to_string(stack.taps[i].channels()) + " channels");
    }
  }
  return stack;
}

std::filesystem::path sidecar_path(const std::filesystem::path& model_path) {
  return std::filesystem::path(model_path.string() + ".json");
}

namespace {

struct Normalization {
  std::array<double, 3> mean{};
  std::array<double, 3> std{};
};

std::vector<char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string crc_hex(const std::vector<char>& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  std::ostringstream os;
  os << std::hex << crc;
  return os.str();
}

class OnnxBackbone final : public Backbone {
 public:
  OnnxBackbone(BackboneKind kind, std::vector<char> model, Normalization norm,
               std::array<TapDescriptor, kTapCount> taps)
      : kind_(kind), model_(std::move(model)), norm_(norm), taps_(std::move(taps)),
        fingerprint_(crc_hex(model_)) {
    for (const auto& tap : taps_) names_.push_back(tap.name);
  }

  BackboneKind kind() const override { return kind_; }
  const std::array<TapDescriptor, kTapCount>& taps() const override { return taps_; }
  std::string fingerprint() const override { return fingerprint_; }

  FeatureStack extract(const RgbImage& image) const override {
    validate_image(image);
    return run(image);
  }

  // Inference without the size gate; used for the load-time probe.
  FeatureStack run(const RgbImage& image) const {
    const int h = static_cast<int>(image.height);
    const int w = static_cast<int>(image.width);
    const int dims[4] = {1, 3, h, w};
    cv::Mat blob(4, dims, CV_32F);
    auto* ptr = blob.ptr<float>();
    for (int ch = 0; ch < 3; ++ch) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double v = image.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x),
                                    static_cast<std::size_t>(ch)) / 255.0;
          ptr[(static_cast<std::size_t>(ch) * h + y) * w + x] =
              static_cast<float>((v - norm_.mean[ch]) / norm_.std[ch]);
        }
      }
    }

    std::vector<cv::Mat> outputs;
    {
      NetLease lease(*this);
      try {
        lease.net().setInput(blob);
        lease.net().forward(outputs, names_);
      } catch (const cv::Exception& e) {
        throw Error(ErrorCode::kInferenceFailure, e.what());
      }
    }
    if (outputs.size() != kTapCount) {
      throw Error(ErrorCode::kInferenceFailure, "network returned " +
                                                    std::to_string(outputs.size()) + " outputs");
    }

    FeatureStack stack;
    for (std::size_t t = 0; t < kTapCount; ++t) {
      const cv::Mat& out = outputs[t];
      if (out.dims != 4 || out.size[0] != 1) {
        throw Error(ErrorCode::kInferenceFailure,
                    "stage " + std::to_string(t + 1) + " output is not a 1xCxHxW tensor");
      }
      const auto c = static_cast<std::size_t>(out.size[1]);
      const auto oh = static_cast<std::size_t>(out.size[2]);
      const auto ow = static_cast<std::size_t>(out.size[3]);
      Tensor tap(c, oh, ow);
      const float* src = out.ptr<float>();
      auto dst = tap.data();
      for (std::size_t i = 0; i < dst.size(); ++i) {
        if (!std::isfinite(src[i])) {
          throw Error(ErrorCode::kInferenceFailure,
                      "stage " + std::to_string(t + 1) + " produced a non-finite activation");
        }
        dst[i] = static_cast<double>(src[i]);
      }
      stack.taps[t] = std::move(tap);
    }
    return stack;
  }

 private:
  // cv::dnn::Net is stateful during forward(), so each call borrows its own instance.
  class NetLease {
   public:
    explicit NetLease(const OnnxBackbone& owner) : owner_(owner) {
      {
        std::lock_guard lock(owner_.pool_mutex_);
        if (!owner_.pool_.empty()) {
          net_ = std::move(owner_.pool_.back());
          owner_.pool_.pop_back();
        }
      }
      if (!net_) {
        net_ = std::make_unique<cv::dnn::Net>(
            cv::dnn::readNetFromONNX(owner_.model_.data(), owner_.model_.size()));
        net_->setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
        net_->setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
      }
    }
    ~NetLease() {
      std::lock_guard lock(owner_.pool_mutex_);
      owner_.pool_.push_back(std::move(net_));
    }
    NetLease(const NetLease&) = delete;
    NetLease& operator=(const NetLease&) = delete;

    cv::dnn::Net& net() { return *net_; }

   private:
    const OnnxBackbone& owner_;
    std::unique_ptr<cv::dnn::Net> net_;
  };

  BackboneKind kind_;
  std::vector<char> model_;
  Normalization norm_;
  std::array<TapDescriptor, kTapCount> taps_;
  std::vector<cv::String> names_;
  std::string fingerprint_;
  mutable std::mutex pool_mutex_;
  mutable std::vector<std::unique_ptr<cv::dnn::Net>> pool_;
};

template <std::size_t N>
std::array<double, N> read_triplet(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != N) {
    throw Error(ErrorCode::kMalformedModel, std::string("sidecar field '") + key +
                                                "' must be an array of " + std::to_string(N));
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = j[key][i].get<double>();
  return out;
}

}  // namespace

BackboneHandle load_backbone(const std::filesystem::path& path, BackboneKind kind) {
  if (kind == BackboneKind::kFilterbank) {
    throw Error(ErrorCode::kInvalidArgument, "filterbank backbones are built in, not loaded");
  }
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kFileNotFound, path.string());
  const auto meta_path = sidecar_path(path);
  if (!std::filesystem::exists(meta_path)) {
    throw Error(ErrorCode::kFileNotFound, "model sidecar " + meta_path.string());
  }

  nlohmann::json meta;
  try {
    std::ifstream in(meta_path);
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedModel, "sidecar " + meta_path.string() + ": " + e.what());
  }

  Normalization norm;
  std::vector<std::string> names;
  std::vector<std::size_t> channels;
  try {
    if (meta.value("kind", std::string{}) != to_string(kind)) {
      throw Error(ErrorCode::kMalformedModel, "sidecar declares kind '" +
                                                  meta.value("kind", std::string{}) +
                                                  "', expected '" + to_string(kind) + "'");
    }
    norm.mean = read_triplet<3>(meta, "mean");
    norm.std = read_triplet<3>(meta, "std");
    names = meta.at("tap_names").get<std::vector<std::string>>();
    channels = meta.at("channels").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedModel, std::string("sidecar: ") + e.what());
  }
  for (double s : norm.std) {
    if (!(s > 0.0)) throw Error(ErrorCode::kMalformedModel, "sidecar std must be positive");
  }
  if (names.size() != kTapCount || channels.size() != kTapCount) {
    throw Error(ErrorCode::kTapShapeMismatch,
                "model declares " + std::to_string(names.size()) + " taps, expected 5");
  }
  std::array<TapDescriptor, kTapCount> taps{};
  for (std::size_t i = 0; i < kTapCount; ++i) {
    if (channels[i] != kTapChannels[i]) {
      throw Error(ErrorCode::kTapShapeMismatch,
                  "stage " + std::to_string(i + 1) + " declares " + std::to_string(channels[i]) +
                      " channels, expected " + std::to_string(kTapChannels[i]));
    }
    taps[i] = TapDescriptor{i + 1, channels[i], names[i]};
  }

  auto bytes = read_bytes(path);
  try {
    (void)cv::dnn::readNetFromONNX(bytes.data(), bytes.size());
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::kMalformedModel, path.string() + ": " + e.what());
  }
  auto backbone = std::make_shared<OnnxBackbone>(kind, std::move(bytes), norm, taps);

  // Probe at the minimum accepted size to confirm the graph matches its sidecar.
  const RgbImage probe(kMinImageSide, kMinImageSide, 128);
  FeatureStack stack;
  try {
    stack = backbone->run(probe);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedModel, std::string("probe inference failed: ") + e.what());
  }
  for (std::size_t i = 0; i < kTapCount; ++i) {
    if (stack.taps[i].channels() != kTapChannels[i]) {
      throw Error(ErrorCode::kTapShapeMismatch,
                  "stage " + std::to_string(i + 1) + " ('" + names[i] + "') emits " +
                      std::to_string(stack.taps[i].channels()) + " channels, expected " +
                      std::to_string(kTapChannels[i]));
    }
  }
  return backbone;
}

}  // namespace dsts
