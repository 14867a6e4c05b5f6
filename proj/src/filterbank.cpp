#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "dsts/backbone.hpp"
#include "dsts/error.hpp"
#include "dsts/simd/kernels.hpp"
#include "dsts/transform.hpp"

namespace dsts {
namespace {

constexpr int kRadius = 3;
constexpr int kSide = 2 * kRadius + 1;
constexpr std::size_t kInputChannels = 3;
constexpr std::size_t kPatchSize = kInputChannels * kSide * kSide;
constexpr std::size_t kStride = 4;

// Uniform [0,1) from the raw engine output so the bank does not depend on the
// standard library's distribution implementations.
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double range(double lo, double hi) { return lo + (hi - lo) * (*this)(); }

 private:
  std::mt19937_64 engine_;
};

enum class Family { kFirstDerivative, kSecondDerivative, kCentreSurround, kGabor };

struct FlavorProfile {
  std::uint64_t seed;
  std::array<double, 4> family_cdf;  // cumulative probabilities in Family order
  double scale_lo, scale_hi;
  double freq_lo, freq_hi;
};

FlavorProfile profile_for(FilterbankFlavor flavor) {
  if (flavor == FilterbankFlavor::kShape) {
    return {0x5348415045ull, {0.40, 0.65, 0.85, 1.0}, 1.0, 2.2, 0.08, 0.20};
  }
  return {0x54455854ull, {0.20, 0.35, 0.45, 1.0}, 0.6, 1.4, 0.18, 0.45};
}

std::array<double, kSide * kSide> spatial_kernel(Uniform& rng, const FlavorProfile& profile) {
  const double pick = rng();
  Family family = Family::kGabor;
  for (std::size_t f = 0; f < profile.family_cdf.size(); ++f) {
    if (pick < profile.family_cdf[f]) {
      family = static_cast<Family>(f);
      break;
    }
  }
  const double theta = std::numbers::pi * rng();
  const double scale = rng.range(profile.scale_lo, profile.scale_hi);
  const double freq = rng.range(profile.freq_lo, profile.freq_hi);
  const double phase = rng() < 0.5 ? 0.0 : std::numbers::pi / 2.0;
  const double envelope = std::clamp(0.56 / freq, 1.0, 2.5);
  const double ct = std::cos(theta);
  const double st = std::sin(theta);

  std::array<double, kSide * kSide> k{};
  for (int dy = -kRadius; dy <= kRadius; ++dy) {
    for (int dx = -kRadius; dx <= kRadius; ++dx) {
      const double u = dx * ct + dy * st;
      const double v = -dx * st + dy * ct;
      const double r2 = u * u + v * v;
      const double g = std::exp(-r2 / (2.0 * scale * scale));
      double value = 0.0;
      switch (family) {
        case Family::kFirstDerivative:
          value = -u / (scale * scale) * g;
          break;
        case Family::kSecondDerivative:
          value = (u * u / std::pow(scale, 4) - 1.0 / (scale * scale)) * g;
          break;
        case Family::kCentreSurround: {
          const double wide = 1.6 * scale;
          value = g / (scale * scale) - std::exp(-r2 / (2.0 * wide * wide)) / (wide * wide);
          break;
        }
        case Family::kGabor:
          value = std::exp(-r2 / (2.0 * envelope * envelope)) *
                  std::cos(2.0 * std::numbers::pi * freq * u + phase);
          break;
      }
      k[static_cast<std::size_t>((dy + kRadius) * kSide + (dx + kRadius))] = value;
    }
  }
  double mean = 0.0;
  for (double v : k) mean += v;
  mean /= static_cast<double>(k.size());
  double norm = 0.0;
  for (double& v : k) {
    v -= mean;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : k) v /= norm;
  return k;
}

// Weights for one filter over (luminance, red-green, blue-yellow) x 7 x 7.
std::vector<double> make_filter(Uniform& rng, const FlavorProfile& profile) {
  std::array<double, kInputChannels> mix{};
  if (rng() < 0.75) {
    mix = {1.0, rng.range(-0.4, 0.4), rng.range(-0.4, 0.4)};
  } else {
    const double angle = 2.0 * std::numbers::pi * rng();
    mix = {0.0, std::cos(angle), std::sin(angle)};
  }
  const auto spatial = spatial_kernel(rng, profile);
  std::vector<double> w(kPatchSize);
  for (std::size_t ch = 0; ch < kInputChannels; ++ch) {
    for (std::size_t i = 0; i < spatial.size(); ++i) w[ch * spatial.size() + i] = mix[ch] * spatial[i];
  }
  return w;
}

Tensor opponent_planes(const RgbImage& image) {
  Tensor out(kInputChannels, image.height, image.width);
  constexpr double kScale = 1.0 / 255.0;
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      const double r = image.at(y, x, 0) * kScale;
      const double g = image.at(y, x, 1) * kScale;
      const double b = image.at(y, x, 2) * kScale;
      out(0, y, x) = (r + g + b) / 3.0;
      out(1, y, x) = r - g;
      out(2, y, x) = 0.5 * (r + g) - b;
    }
  }
  return out;
}

class FilterbankBackbone final : public Backbone {
 public:
  explicit FilterbankBackbone(FilterbankFlavor flavor) : flavor_(flavor) {
    const FlavorProfile profile = profile_for(flavor);
    Uniform rng(profile.seed);
    for (std::size_t t = 0; t < kTapCount; ++t) {
      taps_[t] = TapDescriptor{t + 1, kTapChannels[t], {}};
      const std::size_t filters = kTapChannels[t] / 2;
      bank_[t].reserve(filters);
      for (std::size_t f = 0; f < filters; ++f) bank_[t].push_back(make_filter(rng, profile));
    }
  }

  BackboneKind kind() const override { return BackboneKind::kFilterbank; }
  const std::array<TapDescriptor, kTapCount>& taps() const override { return taps_; }
  std::string fingerprint() const override {
    return flavor_ == FilterbankFlavor::kShape ? "filterbank-shape-v1" : "filterbank-texture-v1";
  }

  FeatureStack extract(const RgbImage& image) const override {
    validate_image(image);
    const GaussianWindow window = default_window();
    FeatureStack stack;
    // Tap t reads pyramid level t (level 0 = full resolution) with stride 4,
    // landing on floor(H / 2^(t+2)) rows.
    Tensor level = opponent_planes(image);
    for (std::size_t t = 0; t < kTapCount; ++t) {
      if (t > 0) level = downsample(level, window);
      stack.taps[t] = apply_bank(level, bank_[t]);
    }
    return stack;
  }

 private:
  static Tensor apply_bank(const Tensor& level, const std::vector<std::vector<double>>& filters) {
    const std::size_t out_h = level.height() / kStride;
    const std::size_t out_w = level.width() / kStride;
    Tensor out(filters.size() * 2, out_h, out_w);
    std::vector<std::size_t> rows(kSide), cols(kSide);
    std::vector<double> patch(kPatchSize);
    for (std::size_t y = 0; y < out_h; ++y) {
      const auto cy = static_cast<std::ptrdiff_t>(kStride * y + kStride / 2);
      for (int d = 0; d < kSide; ++d) rows[d] = reflect_index(cy + d - kRadius, level.height());
      for (std::size_t x = 0; x < out_w; ++x) {
        const auto cx = static_cast<std::ptrdiff_t>(kStride * x + kStride / 2);
        for (int d = 0; d < kSide; ++d) cols[d] = reflect_index(cx + d - kRadius, level.width());
        // Offsets from the centre sample: a constant input gives exactly zero.
        for (std::size_t ch = 0; ch < kInputChannels; ++ch) {
          const double centre = level(ch, static_cast<std::size_t>(cy), static_cast<std::size_t>(cx));
          double* dst = patch.data() + ch * kSide * kSide;
          for (int r = 0; r < kSide; ++r) {
            for (int c = 0; c < kSide; ++c) dst[r * kSide + c] = level(ch, rows[r], cols[c]) - centre;
          }
        }
        for (std::size_t f = 0; f < filters.size(); ++f) {
          const double response = simd::dot(filters[f], patch);
          out(2 * f, y, x) = response > 0.0 ? response : 0.0;
          out(2 * f + 1, y, x) = response < 0.0 ? -response : 0.0;
        }
      }
    }
    return out;
  }

  FilterbankFlavor flavor_;
  std::array<TapDescriptor, kTapCount> taps_{};
  std::array<std::vector<std::vector<double>>, kTapCount> bank_;
};

}  // namespace

BackboneHandle make_filterbank_backbone(FilterbankFlavor flavor) {
  return std::make_shared<const FilterbankBackbone>(flavor);
}

FeatureStack filterbank_features(const RgbImage& image, FilterbankFlavor flavor) {
  static const BackboneHandle shape = make_filterbank_backbone(FilterbankFlavor::kShape);
  static const BackboneHandle texture = make_filterbank_backbone(FilterbankFlavor::kTexture);
  return (flavor == FilterbankFlavor::kShape ? shape : texture)->extract(image);
}

}  // namespace dsts
