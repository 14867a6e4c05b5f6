#pragma once

#include <array>
#include <cstddef>

#include "dsts/tensor.hpp"

namespace dsts {

inline constexpr std::size_t kTapCount = 5;
inline constexpr std::array<std::size_t, kTapCount> kTapChannels{32, 48, 80, 160, 224};
inline constexpr std::size_t kEmbeddingChannels = 544;

// Five per-stage activations tapped from one backbone on one image, finest first.
struct FeatureStack {
  std::array<Tensor, kTapCount> taps;

  friend bool operator==(const FeatureStack&, const FeatureStack&) = default;
};

}  // namespace dsts
