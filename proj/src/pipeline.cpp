#include "dsts/pipeline.hpp"

#include <algorithm>

#include "dsts/error.hpp"
#include "dsts/linalg.hpp"
#include "dsts/parallel.hpp"
#include "dsts/staf.hpp"

namespace dsts {
namespace {

BackboneHandle resolve(const std::string& source, BackboneKind kind) {
  if (source == "filterbank") {
    return make_filterbank_backbone(kind == BackboneKind::kShape ? FilterbankFlavor::kShape
                                                                 : FilterbankFlavor::kTexture);
  }
  return load_backbone(source, kind);
}

bool is_zero_row(std::span<const double> row) {
  return std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; });
}

}  // namespace

Pipeline::Pipeline(EngineConfig config, BackboneHandle shape, BackboneHandle texture)
    : config_(std::move(config)), shape_(std::move(shape)), texture_(std::move(texture)),
      window_(gaussian_window(config_.window_k, config_.window_l, config_.window_sigma)) {
  if (!shape_ || !texture_) throw Error(ErrorCode::kInvalidArgument, "missing backbone");
  if (config_.threads == 0) config_.threads = 1;
}

Pipeline Pipeline::from_config(const EngineConfig& config) {
  return Pipeline(config, resolve(config.shape_backbone, BackboneKind::kShape),
                  resolve(config.texture_backbone, BackboneKind::kTexture));
}

ImageObservation Pipeline::observe(const RgbImage& image) const {
  const AlignedEmbedding shape = align_and_concat(extract_features(image, *shape_), window_);
  const AlignedEmbedding texture = align_and_concat(extract_features(image, *texture_), window_);
  const AlignedEmbedding fused = staf_fuse(shape, texture);
  const MomentMaps moments = local_moments(fused.values, window_);
  return ImageObservation{normalize_layers(moments.mean, fused.layout, config_.normalization_scope),
                          structure_indicator(moments.deviation)};
}

SampleMatrix Pipeline::collect_inner_samples(const RgbImage& image) const {
  const ImageObservation obs = observe(image);
  SampleMatrix samples;
  samples.provenance = Provenance::kInner;
  samples.rows = locations_as_rows(obs.normalized_mean);
  const auto weights = obs.structure.values.plane(0);
  samples.weights.assign(weights.begin(), weights.end());
  return samples;
}

OuterCorpus Pipeline::collect_outer_samples(
    std::size_t image_count, const std::function<RgbImage(std::size_t)>& load) const {
  if (image_count == 0) throw Error(ErrorCode::kEmptyResult, "no pristine images supplied");

  std::vector<Matrix> kept(image_count);
  OuterCorpus corpus;
  corpus.kept_rows.assign(image_count, 0);
  corpus.kept_fractions.assign(image_count, 0.0);
  parallel_for(image_count, config_.threads, [&](std::size_t i) {
    const ImageObservation obs = observe(load(i));
    const Matrix rows = locations_as_rows(obs.normalized_mean);
    const auto indicator = obs.structure.values.plane(0);
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < rows.rows(); ++r) {
      if (indicator[r] >= obs.structure.tau) keep.push_back(r);
    }
    Matrix selected(keep.size(), rows.cols());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const auto src = rows.row(keep[k]);
      std::copy(src.begin(), src.end(), selected.row(k).begin());
    }
    corpus.kept_rows[i] = keep.size();
    corpus.kept_fractions[i] =
        static_cast<double>(keep.size()) / static_cast<double>(rows.rows());
    kept[i] = std::move(selected);
  });

  std::size_t total = 0;
  for (std::size_t n : corpus.kept_rows) total += n;
  corpus.samples.provenance = Provenance::kOuter;
  corpus.samples.rows = Matrix(total, kEmbeddingChannels);
  std::size_t at = 0;
  bool informative = false;
  for (const Matrix& block : kept) {
    for (std::size_t r = 0; r < block.rows(); ++r, ++at) {
      const auto src = block.row(r);
      informative = informative || !is_zero_row(src);
      std::copy(src.begin(), src.end(), corpus.samples.rows.row(at).begin());
    }
  }
  if (total == 0 || !informative) {
    throw Error(ErrorCode::kEmptyResult,
                "no structured locations survived filtering (corpus is flat or empty)");
  }
  if (total <= kEmbeddingChannels) {
    throw Error(ErrorCode::kCorpusTooSmall,
                "kept " + std::to_string(total) + " samples; covariance needs more than " +
                    std::to_string(kEmbeddingChannels));
  }
  return corpus;
}

OuterCorpus Pipeline::collect_outer_samples(const std::vector<RgbImage>& images) const {
  return collect_outer_samples(images.size(), [&](std::size_t i) { return images[i]; });
}

GaussianStats Pipeline::fit_outer(const OuterCorpus& corpus) const {
  GaussianStats stats = fit_gaussian(corpus.samples);
  const GaussianStats reg = regularize(stats, config_.lambda);
  const double cond = condition_estimate(reg.covariance, Cholesky(reg.covariance));
  if (!(cond <= config_.max_condition)) {
    throw Error(ErrorCode::kIllConditioned,
                "regularized outer covariance has condition ~" + std::to_string(cond));
  }
  return stats;
}

QualityScore Pipeline::score(const RgbImage& image, const GaussianStats& regularized_outer) const {
  const SampleMatrix inner = collect_inner_samples(image);
  const GaussianStats inner_stats = regularize(fit_gaussian(inner), config_.lambda);
  return dsts_score(regularized_outer, inner, inner_stats, config_.weight_mode, config_.threads);
}

QualityScore score_image(const RgbImage& image, const GaussianStats& outer,
                         const Pipeline& pipeline) {
  return pipeline.score(image, regularize(outer, pipeline.config().lambda));
}

}  // namespace dsts
