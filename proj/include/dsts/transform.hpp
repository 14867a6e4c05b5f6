#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "dsts/feature_stack.hpp"
#include "dsts/tensor.hpp"

namespace dsts {

// Unit-volume, circularly symmetric Gaussian window over [-K,K] x [-L,L].
class GaussianWindow {
 public:
  GaussianWindow(int half_rows, int half_cols, double sigma, std::vector<double> coefficients)
      : half_rows_(half_rows), half_cols_(half_cols), sigma_(sigma),
        coefficients_(std::move(coefficients)) {}

  int half_rows() const noexcept { return half_rows_; }
  int half_cols() const noexcept { return half_cols_; }
  int rows() const noexcept { return 2 * half_rows_ + 1; }
  int cols() const noexcept { return 2 * half_cols_ + 1; }
  double sigma() const noexcept { return sigma_; }

  // Coefficient at offset (k, l), k in [-K, K], l in [-L, L].
  double at(int k, int l) const {
    return coefficients_[static_cast<std::size_t>((k + half_rows_) * cols() + (l + half_cols_))];
  }
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }

 private:
  int half_rows_;
  int half_cols_;
  double sigma_;
  std::vector<double> coefficients_;
};

// Throws kInvalidArgument for K or L < 1 or sigma <= 0.
GaussianWindow gaussian_window(int half_rows, int half_cols, double sigma);

// 7x7, sigma = 7/6.
GaussianWindow default_window();

// Mirror index into [0, n) without repeating the edge sample (reflect-101).
// A length-1 axis maps everything to 0.
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n);

// Per-channel Gaussian low-pass with reflect padding, then stride-2 sampling.
// Output is floor(H/2) x floor(W/2). Throws kDegenerateInput if H or W < 2.
Tensor downsample(const Tensor& input, const GaussianWindow& window);

struct LayerSpan {
  std::size_t layer;   // 1-based stage order
  std::size_t offset;  // first channel
  std::size_t count;
};

using LayerLayout = std::array<LayerSpan, kTapCount>;

LayerLayout standard_layout();

// Multi-stage embedding on the coarsest tap's grid, channels concatenated in stage order.
struct AlignedEmbedding {
  Tensor values;  // (544, P, Q)
  LayerLayout layout = standard_layout();
};

// Brings every tap onto the final tap's grid by repeated Gaussian halving and
// concatenates along channels. Throws kShapeMismatch if the taps do not carry
// the fixed channel layout or cannot reach a common grid by halving.
AlignedEmbedding align_and_concat(const FeatureStack& stack, const GaussianWindow& window);

}  // namespace dsts
