#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsts/image.hpp"

namespace dsts {

enum class DistortionType { kBlur, kNoise, kJpeg };

const char* to_string(DistortionType type);

struct DistortionStep {
  DistortionType type;
  int level;         // 1-based, larger = stronger
  double parameter;  // blur sigma (px), noise std (0..1 scale), or JPEG quality
};

// Blur sigma {1,2,4}, noise std {5,15,30}/255, JPEG quality {80,40,10}.
std::vector<DistortionStep> default_ladder();

// sigma <= 0 returns the source unchanged.
RgbImage gaussian_blur(const RgbImage& image, double sigma);
// Additive Gaussian noise with std given on the [0,1] intensity scale.
RgbImage add_white_noise(const RgbImage& image, double stddev, std::uint64_t seed);
std::vector<unsigned char> encode_jpeg(const RgbImage& image, int quality);
RgbImage decode_image(const std::vector<unsigned char>& bytes);

RgbImage apply_distortion(const RgbImage& image, const DistortionStep& step, std::uint64_t seed);

}  // namespace dsts
