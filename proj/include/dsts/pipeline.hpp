#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "dsts/backbone.hpp"
#include "dsts/config.hpp"
#include "dsts/distance.hpp"
#include "dsts/statistics.hpp"
#include "dsts/transform.hpp"

namespace dsts {

// Per-image result of the perceptual transform and moment modelling.
struct ImageObservation {
  Tensor normalized_mean;  // (544, P, Q), layer-normalized I_mu
  StructureMap structure;
};

struct OuterCorpus {
  SampleMatrix samples;                // provenance outer
  std::vector<std::size_t> kept_rows;  // per image
  std::vector<double> kept_fractions;  // per image
};

// Shape and texture backbones plus the engine configuration. Immutable; every
// method may be called from several threads.
class Pipeline {
 public:
  Pipeline(EngineConfig config, BackboneHandle shape, BackboneHandle texture);

  // Resolves "filterbank" entries to the built-in banks and anything else to ONNX files.
  static Pipeline from_config(const EngineConfig& config);

  const EngineConfig& config() const noexcept { return config_; }
  const GaussianWindow& window() const noexcept { return window_; }
  const Backbone& shape_backbone() const noexcept { return *shape_; }
  const Backbone& texture_backbone() const noexcept { return *texture_; }

  // Both backbones -> align -> STAF -> local moments -> layer normalization + structure map.
  ImageObservation observe(const RgbImage& image) const;

  // Every location becomes a row weighted by its structure indicator.
  SampleMatrix collect_inner_samples(const RgbImage& image) const;

  // Keeps locations whose structure indicator reaches the image's own mean.
  // Images are produced on demand by `load(i)` and processed in parallel; rows
  // are stacked in corpus order. Throws kEmptyResult when nothing informative
  // survives and kCorpusTooSmall when s <= c.
  OuterCorpus collect_outer_samples(std::size_t image_count,
                                    const std::function<RgbImage(std::size_t)>& load) const;
  OuterCorpus collect_outer_samples(const std::vector<RgbImage>& images) const;

  // Fits outer statistics and rejects them when the regularized covariance is
  // ill-conditioned beyond config().max_condition (kIllConditioned).
  GaussianStats fit_outer(const OuterCorpus& corpus) const;

  QualityScore score(const RgbImage& image, const GaussianStats& regularized_outer) const;

 private:
  EngineConfig config_;
  BackboneHandle shape_;
  BackboneHandle texture_;
  GaussianWindow window_;
};

// Full scoring path for one image against raw (unregularized) outer statistics.
QualityScore score_image(const RgbImage& image, const GaussianStats& outer,
                         const Pipeline& pipeline);

}  // namespace dsts
