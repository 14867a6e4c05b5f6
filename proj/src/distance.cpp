#include "dsts/distance.hpp"

#include <cmath>

#include "dsts/error.hpp"
#include "dsts/parallel.hpp"
#include "dsts/simd/kernels.hpp"

namespace dsts {

GaussianStats regularize(const GaussianStats& stats, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be positive");
  GaussianStats out = stats;
  for (std::size_t i = 0; i < out.dims(); ++i) out.covariance(i, i) += lambda;
  try {
    (void)Cholesky(out.covariance);
  } catch (const Error& e) {
    throw Error(ErrorCode::kFactorizationFailed,
                std::string("covariance is singular even after regularization (") + e.what() + ")");
  }
  return out;
}

namespace {

Matrix average(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "outer and inner covariances differ in size");
  }
  Matrix out(a.rows(), a.cols());
  const auto x = a.data();
  const auto y = b.data();
  auto z = out.data();
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = 0.5 * (x[i] + y[i]);
  return out;
}

}  // namespace

PooledCovariance::PooledCovariance(const Matrix& outer_cov, const Matrix& inner_cov)
    : pooled_(average(outer_cov, inner_cov)), chol_(pooled_) {}

double PooledCovariance::distance(std::span<const double> mean,
                                  std::span<const double> sample) const {
  const std::size_t n = dims();
  if (mean.size() != n || sample.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "sample length " + std::to_string(sample.size()) +
                                                   " against c=" + std::to_string(n));
  }
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(sample[i])) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite sample component");
    }
    diff[i] = mean[i] - sample[i];
  }
  const auto y = chol_.forward_solve(diff);
  return std::sqrt(simd::dot(y, y));
}

double mahalanobis(const GaussianStats& outer, const GaussianStats& inner,
                   std::span<const double> sample) {
  const PooledCovariance pooled(outer.covariance, inner.covariance);
  return pooled.distance(outer.mean, sample);
}

QualityScore dsts_score(const GaussianStats& outer, const SampleMatrix& inner_samples,
                        const GaussianStats& inner_stats, WeightMode mode, unsigned threads) {
  const std::size_t n = inner_samples.size();
  if (n == 0) throw Error(ErrorCode::kEmptyResult, "no inner samples to score");
  if (inner_samples.weights.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "inner samples must carry one weight per row");
  }
  if (inner_samples.dims() != outer.dims()) {
    throw Error(ErrorCode::kDimensionMismatch, "inner samples have c=" +
                                                   std::to_string(inner_samples.dims()) +
                                                   ", outer stats c=" +
                                                   std::to_string(outer.dims()));
  }

  const PooledCovariance pooled(outer.covariance, inner_stats.covariance);
  QualityScore score;
  score.distances.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    score.distances[i] = pooled.distance(outer.mean, inner_samples.rows.row(i));
  });

  for (double w : inner_samples.weights) score.weight_sum += w;
  double total = 0.0;
  if (score.weight_sum > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const double w = inner_samples.weights[i];
      total += (mode == WeightMode::kNormalized ? w / score.weight_sum : w) * score.distances[i];
    }
  } else {
    for (double d : score.distances) total += d;
    total /= static_cast<double>(n);
  }
  score.dsts = total;
  return score;
}

}  // namespace dsts
