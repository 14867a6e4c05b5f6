#include "dsts/statistics.hpp"

#include <cmath>

#include "dsts/error.hpp"
#include "dsts/simd/kernels.hpp"

namespace dsts {

MomentMaps local_moments(const Tensor& embedding, const GaussianWindow& window) {
  const std::size_t h = embedding.height();
  const std::size_t w = embedding.width();
  const int hr = window.half_rows();
  const int hc = window.half_cols();
  const auto wr = static_cast<std::size_t>(window.rows());
  const auto wc = static_cast<std::size_t>(window.cols());

  std::vector<std::size_t> rows(h * wr), cols(w * wc);
  for (std::size_t y = 0; y < h; ++y) {
    for (int k = -hr; k <= hr; ++k) {
      rows[y * wr + static_cast<std::size_t>(k + hr)] =
          reflect_index(static_cast<std::ptrdiff_t>(y) + k, h);
    }
  }
  for (std::size_t x = 0; x < w; ++x) {
    for (int l = -hc; l <= hc; ++l) {
      cols[x * wc + static_cast<std::size_t>(l + hc)] =
          reflect_index(static_cast<std::ptrdiff_t>(x) + l, w);
    }
  }

  const auto& coeffs = window.coefficients();
  MomentMaps maps{Tensor(embedding.channels(), h, w), Tensor(embedding.channels(), h, w)};
  for (std::size_t c = 0; c < embedding.channels(); ++c) {
    const auto src = embedding.plane(c);
    auto mu = maps.mean.plane(c);
    auto sigma = maps.deviation.plane(c);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        // Accumulate offsets from the centre sample so a flat patch gives exactly
        // mean = centre and deviation = 0.
        const double centre = src[y * w + x];
        double offset = 0.0;
        for (std::size_t k = 0; k < wr; ++k) {
          const double* row = src.data() + rows[y * wr + k] * w;
          for (std::size_t l = 0; l < wc; ++l) offset += coeffs[k * wc + l] * (row[cols[x * wc + l]] - centre);
        }
        const double mean = centre + offset;
        double spread = 0.0;
        for (std::size_t k = 0; k < wr; ++k) {
          const double* row = src.data() + rows[y * wr + k] * w;
          for (std::size_t l = 0; l < wc; ++l) {
            const double d = row[cols[x * wc + l]] - mean;
            spread += coeffs[k * wc + l] * d * d;
          }
        }
        mu[y * w + x] = mean;
        sigma[y * w + x] = std::sqrt(spread);
      }
    }
  }
  return maps;
}

Tensor normalize_layers(const Tensor& mean_map, const LayerLayout& layout,
                        NormalizationScope scope) {
  Tensor out = mean_map;
  const std::size_t locations = mean_map.plane_size();
  for (const LayerSpan& span : layout) {
    if (span.offset + span.count > mean_map.channels()) {
      throw Error(ErrorCode::kShapeMismatch, "layer layout exceeds the channel count");
    }
    if (scope == NormalizationScope::kWholeMap) {
      double sq = 0.0;
      for (std::size_t c = span.offset; c < span.offset + span.count; ++c) {
        const auto p = mean_map.plane(c);
        sq += simd::dot(p, p);
      }
      if (sq == 0.0) continue;
      const double inv = 1.0 / std::sqrt(sq);
      for (std::size_t c = span.offset; c < span.offset + span.count; ++c) {
        for (double& v : out.plane(c)) v *= inv;
      }
      continue;
    }
    std::vector<double> sq(locations, 0.0);
    for (std::size_t c = span.offset; c < span.offset + span.count; ++c) {
      const auto p = mean_map.plane(c);
      for (std::size_t i = 0; i < locations; ++i) sq[i] += p[i] * p[i];
    }
    for (std::size_t c = span.offset; c < span.offset + span.count; ++c) {
      auto p = out.plane(c);
      for (std::size_t i = 0; i < locations; ++i) {
        if (sq[i] > 0.0) p[i] /= std::sqrt(sq[i]);
      }
    }
  }
  return out;
}

StructureMap structure_indicator(const Tensor& deviation) {
  StructureMap map{Tensor(1, deviation.height(), deviation.width()), 0.0};
  if (deviation.channels() == 0 || deviation.plane_size() == 0) return map;
  auto values = map.values.plane(0);
  for (std::size_t c = 0; c < deviation.channels(); ++c) simd::axpy(1.0, deviation.plane(c), values);
  const auto channels = static_cast<double>(deviation.channels());
  double total = 0.0;
  for (double& v : values) {
    v /= channels;
    total += v;
  }
  map.tau = total / static_cast<double>(values.size());
  return map;
}

Matrix locations_as_rows(const Tensor& normalized) {
  Matrix rows(normalized.plane_size(), normalized.channels());
  for (std::size_t c = 0; c < normalized.channels(); ++c) {
    const auto p = normalized.plane(c);
    for (std::size_t i = 0; i < p.size(); ++i) rows(i, c) = p[i];
  }
  return rows;
}

GaussianStats fit_gaussian(const SampleMatrix& samples) {
  const std::size_t n = samples.size();
  const std::size_t c = samples.dims();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two samples to fit a Gaussian");

  GaussianStats stats;
  stats.sample_count = n;
  stats.provenance = samples.provenance;
  stats.mean.assign(c, 0.0);
  for (std::size_t i = 0; i < n; ++i) simd::axpy(1.0, samples.rows.row(i), stats.mean);
  for (double& v : stats.mean) v /= static_cast<double>(n);

  // Centred data stored column-major so each covariance entry is one contiguous dot.
  Matrix centred(c, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = samples.rows.row(i);
    for (std::size_t j = 0; j < c; ++j) centred(j, i) = row[j] - stats.mean[j];
  }
  stats.covariance = Matrix(c, c);
  const double scale = 1.0 / static_cast<double>(n - 1);
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = a; b < c; ++b) {
      const double v = simd::dot(centred.row(a), centred.row(b)) * scale;
      stats.covariance(a, b) = v;
      stats.covariance(b, a) = v;
    }
  }
  return stats;
}

RunningCovariance::RunningCovariance(std::size_t dims)
    : dims_(dims), mean_(dims, 0.0), comoment_(dims, dims), delta_(dims), residual_(dims) {}

void RunningCovariance::add(std::span<const double> row) {
  if (row.size() != dims_) throw Error(ErrorCode::kDimensionMismatch, "row width differs");
  ++count_;
  const double inv = 1.0 / static_cast<double>(count_);
  for (std::size_t j = 0; j < dims_; ++j) {
    delta_[j] = row[j] - mean_[j];
    mean_[j] += delta_[j] * inv;
    residual_[j] = row[j] - mean_[j];
  }
  for (std::size_t a = 0; a < dims_; ++a) {
    auto target = comoment_.row(a);
    simd::axpy(delta_[a], std::span<const double>(residual_).subspan(a),
               target.subspan(a));
  }
}

GaussianStats RunningCovariance::finish(Provenance provenance) const {
  if (count_ < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two samples to fit a Gaussian");
  GaussianStats stats;
  stats.mean = mean_;
  stats.sample_count = count_;
  stats.provenance = provenance;
  stats.covariance = Matrix(dims_, dims_);
  const double scale = 1.0 / static_cast<double>(count_ - 1);
  for (std::size_t a = 0; a < dims_; ++a) {
    for (std::size_t b = a; b < dims_; ++b) {
      const double v = comoment_(a, b) * scale;
      stats.covariance(a, b) = v;
      stats.covariance(b, a) = v;
    }
  }
  return stats;
}

}  // namespace dsts
