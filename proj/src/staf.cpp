#include "dsts/staf.hpp"

#include "dsts/error.hpp"
#include "dsts/simd/kernels.hpp"

namespace dsts {

Tensor channel_variance(const Tensor& embedding) {
  const std::size_t channels = embedding.channels();
  Tensor mean(1, embedding.height(), embedding.width());
  Tensor variance(1, embedding.height(), embedding.width());
  if (channels == 0) return variance;
  // Offsets from channel 0 keep a constant location at exactly zero variance.
  const auto base = embedding.plane(0);
  for (std::size_t c = 1; c < channels; ++c) {
    simd::axpy(1.0, embedding.plane(c), mean.plane(0));
    simd::axpy(-1.0, base, mean.plane(0));
  }
  auto m = mean.data();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = base[i] + m[i] / static_cast<double>(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    simd::accumulate_squared_deviation(embedding.plane(c), mean.plane(0), variance.plane(0));
  }
  for (double& v : variance.data()) v /= static_cast<double>(channels);
  return variance;
}

namespace {

void check_compatible(const AlignedEmbedding& shape, const AlignedEmbedding& texture) {
  if (!shape.values.same_shape(texture.values)) {
    throw Error(ErrorCode::kShapeMismatch, "shape and texture embeddings differ in size");
  }
  for (std::size_t i = 0; i < shape.layout.size(); ++i) {
    const LayerSpan& a = shape.layout[i];
    const LayerSpan& b = texture.layout[i];
    if (a.layer != b.layer || a.offset != b.offset || a.count != b.count) {
      throw Error(ErrorCode::kShapeMismatch, "shape and texture embeddings differ in layout");
    }
  }
}

}  // namespace

AttentionMaps attention_maps(const AlignedEmbedding& shape, const AlignedEmbedding& texture) {
  check_compatible(shape, texture);
  const Tensor vs = channel_variance(shape.values);
  const Tensor vt = channel_variance(texture.values);
  AttentionMaps maps{Tensor(1, vs.height(), vs.width()), Tensor(1, vs.height(), vs.width())};
  const auto s = vs.data();
  const auto t = vt.data();
  auto as = maps.shape.data();
  auto at = maps.texture.data();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double total = s[i] + t[i];
    if (total > 0.0) {
      as[i] = s[i] / total;
      at[i] = t[i] / total;
    } else {
      as[i] = 0.5;
      at[i] = 0.5;
    }
  }
  return maps;
}

AlignedEmbedding staf_fuse(const AlignedEmbedding& shape, const AlignedEmbedding& texture) {
  const AttentionMaps maps = attention_maps(shape, texture);
  AlignedEmbedding fused;
  fused.layout = shape.layout;
  fused.values = Tensor(shape.values.channels(), shape.values.height(), shape.values.width());
  const auto as = maps.shape.data();
  const auto at = maps.texture.data();
  for (std::size_t c = 0; c < shape.values.channels(); ++c) {
    const auto s = shape.values.plane(c);
    const auto t = texture.values.plane(c);
    auto out = fused.values.plane(c);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s[i] * as[i] + t[i] * at[i];
  }
  return fused;
}

}  // namespace dsts
