#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsts/tensor.hpp"
#include "dsts/transform.hpp"

namespace dsts {

// Gaussian-weighted local mean and standard deviation per channel.
struct MomentMaps {
  Tensor mean;       // I_mu
  Tensor deviation;  // I_sigma, >= 0
};

MomentMaps local_moments(const Tensor& embedding, const GaussianWindow& window);

enum class NormalizationScope {
  kPerLocation,  // each layer subvector at each location gets unit l2 norm
  kWholeMap,     // each layer block is divided by its norm over the whole map
};

// Zero subvectors (or zero layer blocks) pass through unchanged.
Tensor normalize_layers(const Tensor& mean_map, const LayerLayout& layout,
                        NormalizationScope scope = NormalizationScope::kPerLocation);

struct StructureMap {
  Tensor values;  // (1, P, Q), cross-channel mean of I_sigma
  double tau = 0.0;  // spatial mean of values
};

StructureMap structure_indicator(const Tensor& deviation);

enum class Provenance : std::uint8_t { kOuter, kInner };

// One row per spatial location (row index = y * Q + x), one column per channel.
struct SampleMatrix {
  Matrix rows;
  Provenance provenance = Provenance::kInner;
  std::vector<double> weights;  // inner samples only: structure indicator per row

  std::size_t size() const noexcept { return rows.rows(); }
  std::size_t dims() const noexcept { return rows.cols(); }
};

// Transposes a (C, P, Q) tensor into a (P*Q) x C sample matrix.
Matrix locations_as_rows(const Tensor& normalized);

struct GaussianStats {
  std::vector<double> mean;
  Matrix covariance;
  std::uint64_t sample_count = 0;
  Provenance provenance = Provenance::kOuter;

  std::size_t dims() const noexcept { return mean.size(); }
};

// Column mean and unbiased covariance (1/(n-1)) via two passes over the
// assembled matrix. Throws kInvalidArgument for fewer than two rows.
GaussianStats fit_gaussian(const SampleMatrix& samples);

// Single-pass (Welford co-moment) accumulator; agrees with fit_gaussian to rounding.
class RunningCovariance {
 public:
  explicit RunningCovariance(std::size_t dims);

  void add(std::span<const double> row);
  std::uint64_t count() const noexcept { return count_; }
  GaussianStats finish(Provenance provenance = Provenance::kOuter) const;

 private:
  std::size_t dims_;
  std::uint64_t count_ = 0;
  std::vector<double> mean_;
  Matrix comoment_;
  std::vector<double> delta_;
  std::vector<double> residual_;
};

}  // namespace dsts
