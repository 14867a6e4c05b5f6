#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dsts/linalg.hpp"
#include "dsts/statistics.hpp"

namespace dsts {

inline constexpr double kDefaultLambda = 1e-6;

// Returns a copy with lambda added to the covariance diagonal. Throws
// kInvalidArgument for lambda <= 0 and kFactorizationFailed if the result is
// still not positive definite.
GaussianStats regularize(const GaussianStats& stats, double lambda);

// (Sigma_G + Sigma_M) / 2, factored once and shared by every sample of an image.
class PooledCovariance {
 public:
  // Covariances are used as given; regularize them first when they may be singular.
  PooledCovariance(const Matrix& outer_cov, const Matrix& inner_cov);

  std::size_t dims() const noexcept { return chol_.size(); }
  const Matrix& pooled() const noexcept { return pooled_; }

  // sqrt((mu - x)^T pooled^-1 (mu - x)) via a triangular solve.
  double distance(std::span<const double> mean, std::span<const double> sample) const;

 private:
  Matrix pooled_;
  Cholesky chol_;
};

// Mahalanobis distance between one sample and the outer distribution under the
// pooled covariance. Throws kDimensionMismatch or kInvalidArgument (non-finite sample).
double mahalanobis(const GaussianStats& outer, const GaussianStats& inner,
                   std::span<const double> sample);

enum class WeightMode {
  kNormalized,  // weights divided by their sum
  kRaw,         // structure-indicator values used directly
};

struct QualityScore {
  double dsts = 0.0;
  std::vector<double> distances;  // one per inner sample, row order
  double weight_sum = 0.0;
};

// Content-weighted sum of per-sample distances. When every weight is zero the
// score falls back to the unweighted mean distance. Per-sample distances run
// on up to `threads` workers; the reduction is sequential in row order.
QualityScore dsts_score(const GaussianStats& outer, const SampleMatrix& inner_samples,
                        const GaussianStats& inner_stats,
                        WeightMode mode = WeightMode::kNormalized, unsigned threads = 1);

}  // namespace dsts
