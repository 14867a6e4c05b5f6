#include "dsts/transform.hpp"

#include <cmath>
#include <string>

#include "dsts/error.hpp"

namespace dsts {

GaussianWindow gaussian_window(int half_rows, int half_cols, double sigma) {
  if (half_rows < 1 || half_cols < 1) {
    throw Error(ErrorCode::kInvalidArgument, "window half-extents must be >= 1");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "window sigma must be positive");
  }
  const int rows = 2 * half_rows + 1;
  const int cols = 2 * half_cols + 1;
  std::vector<double> coeffs(static_cast<std::size_t>(rows * cols));
  const double denom = 2.0 * sigma * sigma;
  double sum = 0.0;
  for (int k = -half_rows; k <= half_rows; ++k) {
    for (int l = -half_cols; l <= half_cols; ++l) {
      const double v = std::exp(-static_cast<double>(k * k + l * l) / denom);
      coeffs[static_cast<std::size_t>((k + half_rows) * cols + (l + half_cols))] = v;
      sum += v;
    }
  }
  for (double& v : coeffs) v /= sum;
  return GaussianWindow(half_rows, half_cols, sigma, std::move(coeffs));
}

GaussianWindow default_window() { return gaussian_window(3, 3, 7.0 / 6.0); }

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto len = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t period = 2 * (len - 1);
  i %= period;
  if (i < 0) i += period;
  if (i >= len) i = period - i;
  return static_cast<std::size_t>(i);
}

namespace {

std::vector<std::size_t> reflected_positions(std::size_t out_len, std::size_t in_len, int half) {
  // Index table for input positions 2*o + k, k in [-half, half].
  const std::size_t taps = static_cast<std::size_t>(2 * half + 1);
  std::vector<std::size_t> table(out_len * taps);
  for (std::size_t o = 0; o < out_len; ++o) {
    for (int k = -half; k <= half; ++k) {
      table[o * taps + static_cast<std::size_t>(k + half)] =
          reflect_index(static_cast<std::ptrdiff_t>(2 * o) + k, in_len);
    }
  }
  return table;
}

}  // namespace

Tensor downsample(const Tensor& input, const GaussianWindow& window) {
  if (input.height() < 2 || input.width() < 2) {
    throw Error(ErrorCode::kDegenerateInput, "cannot halve a map with a side below 2");
  }
  const std::size_t out_h = input.height() / 2;
  const std::size_t out_w = input.width() / 2;
  const int hr = window.half_rows();
  const int hc = window.half_cols();
  const auto wr = static_cast<std::size_t>(window.rows());
  const auto wc = static_cast<std::size_t>(window.cols());
  const auto rows = reflected_positions(out_h, input.height(), hr);
  const auto cols = reflected_positions(out_w, input.width(), hc);
  const auto& coeffs = window.coefficients();

  Tensor out(input.channels(), out_h, out_w);
  for (std::size_t c = 0; c < input.channels(); ++c) {
    const auto src = input.plane(c);
    auto dst = out.plane(c);
    for (std::size_t y = 0; y < out_h; ++y) {
      for (std::size_t x = 0; x < out_w; ++x) {
        double acc = 0.0;
        for (std::size_t k = 0; k < wr; ++k) {
          const double* row = src.data() + rows[y * wr + k] * input.width();
          const double* w = coeffs.data() + k * wc;
          const std::size_t* col = cols.data() + x * wc;
          for (std::size_t l = 0; l < wc; ++l) acc += w[l] * row[col[l]];
        }
        dst[y * out_w + x] = acc;
      }
    }
  }
  return out;
}

LayerLayout standard_layout() {
  LayerLayout layout{};
  std::size_t offset = 0;
  for (std::size_t i = 0; i < kTapCount; ++i) {
    layout[i] = LayerSpan{i + 1, offset, kTapChannels[i]};
    offset += kTapChannels[i];
  }
  return layout;
}

AlignedEmbedding align_and_concat(const FeatureStack& stack, const GaussianWindow& window) {
  for (std::size_t i = 0; i < kTapCount; ++i) {
    if (stack.taps[i].channels() != kTapChannels[i]) {
      throw Error(ErrorCode::kShapeMismatch,
                  "tap " + std::to_string(i + 1) + " has " +
                      std::to_string(stack.taps[i].channels()) + " channels, layout expects " +
                      std::to_string(kTapChannels[i]));
    }
  }
  const std::size_t grid_h = stack.taps.back().height();
  const std::size_t grid_w = stack.taps.back().width();
  if (grid_h == 0 || grid_w == 0) {
    throw Error(ErrorCode::kShapeMismatch, "final tap has an empty grid");
  }

  AlignedEmbedding embedding;
  embedding.values = Tensor(kEmbeddingChannels, grid_h, grid_w);
  for (std::size_t i = 0; i < kTapCount; ++i) {
    Tensor tap = stack.taps[i];
    while (tap.height() != grid_h || tap.width() != grid_w) {
      if (tap.height() < 2 * grid_h || tap.width() < 2 * grid_w) {
        throw Error(ErrorCode::kShapeMismatch,
                    "tap " + std::to_string(i + 1) + " cannot be halved onto the " +
                        std::to_string(grid_h) + "x" + std::to_string(grid_w) + " grid");
      }
      tap = downsample(tap, window);
    }
    const LayerSpan& span = embedding.layout[i];
    for (std::size_t c = 0; c < span.count; ++c) {
      const auto src = tap.plane(c);
      auto dst = embedding.values.plane(span.offset + c);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  return embedding;
}

}  // namespace dsts
