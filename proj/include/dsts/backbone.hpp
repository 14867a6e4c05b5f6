#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "dsts/feature_stack.hpp"
#include "dsts/image.hpp"

namespace dsts {

enum class BackboneKind { kShape, kTexture, kFilterbank };

const char* to_string(BackboneKind kind);
BackboneKind parse_backbone_kind(const std::string& text);

struct TapDescriptor {
  std::size_t stage;     // 1..5
  std::size_t channels;
  std::string name;      // graph output name (empty for the filterbank)
};

// A feature extractor producing five taps. Implementations are immutable after
// construction; extract() may be called concurrently.
class Backbone {
 public:
  virtual ~Backbone() = default;

  virtual BackboneKind kind() const = 0;
  virtual const std::array<TapDescriptor, kTapCount>& taps() const = 0;
  // Content hash identifying the weights (recorded in stats sidecars).
  virtual std::string fingerprint() const = 0;

  // Throws kImageTooSmall for images below 224 px and kInferenceFailure if the
  // network fails or emits non-finite values.
  virtual FeatureStack extract(const RgbImage& image) const = 0;
};

using BackboneHandle = std::shared_ptr<const Backbone>;

FeatureStack extract_features(const RgbImage& image, const Backbone& backbone);

// Which half of the shape/texture pair a built-in filterbank stands in for.
// The two flavours differ in seed and in their frequency emphasis.
enum class FilterbankFlavor { kShape, kTexture };

// Deterministic bank of oriented derivative, Gabor and centre-surround filters
// applied at five dyadic scales with half-wave rectification.
BackboneHandle make_filterbank_backbone(FilterbankFlavor flavor);

FeatureStack filterbank_features(const RgbImage& image,
                                 FilterbankFlavor flavor = FilterbankFlavor::kTexture);

// ONNX network with five declared tap outputs plus a JSON sidecar at
// "<model path>.json": {kind, mean[3], std[3], tap_names[5], channels[5]}.
// Throws kFileNotFound, kMalformedModel, or kTapShapeMismatch (naming the stage).
BackboneHandle load_backbone(const std::filesystem::path& path, BackboneKind kind);

std::filesystem::path sidecar_path(const std::filesystem::path& model_path);

}  // namespace dsts
