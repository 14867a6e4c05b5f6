#include "dsts/distort.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <random>

#include "dsts/error.hpp"

namespace dsts {

const char* to_string(DistortionType type) {
  switch (type) {
    case DistortionType::kBlur: return "blur";
    case DistortionType::kNoise: return "noise";
    case DistortionType::kJpeg: return "jpeg";
  }
  return "unknown";
}

std::vector<DistortionStep> default_ladder() {
  return {
      {DistortionType::kBlur, 1, 1.0},           {DistortionType::kBlur, 2, 2.0},
      {DistortionType::kBlur, 3, 4.0},           {DistortionType::kNoise, 1, 5.0 / 255.0},
      {DistortionType::kNoise, 2, 15.0 / 255.0}, {DistortionType::kNoise, 3, 30.0 / 255.0},
      {DistortionType::kJpeg, 1, 80.0},          {DistortionType::kJpeg, 2, 40.0},
      {DistortionType::kJpeg, 3, 10.0},
  };
}

namespace {

cv::Mat as_mat(const RgbImage& image) {
  return cv::Mat(static_cast<int>(image.height), static_cast<int>(image.width), CV_8UC3,
                 const_cast<std::uint8_t*>(image.data.data()));
}

RgbImage from_mat(const cv::Mat& rgb) {
  RgbImage out(static_cast<std::size_t>(rgb.cols), static_cast<std::size_t>(rgb.rows));
  const cv::Mat cont = rgb.isContinuous() ? rgb : rgb.clone();
  std::copy(cont.data, cont.data + out.data.size(), out.data.begin());
  return out;
}

}  // namespace

RgbImage gaussian_blur(const RgbImage& image, double sigma) {
  if (!(sigma > 0.0)) return image;
  cv::Mat out;
  cv::GaussianBlur(as_mat(image), out, cv::Size(0, 0), sigma, sigma, cv::BORDER_REFLECT_101);
  return from_mat(out);
}

RgbImage add_white_noise(const RgbImage& image, double stddev, std::uint64_t seed) {
  RgbImage out = image;
  if (!(stddev > 0.0)) return out;
  std::mt19937_64 engine(seed);
  const auto uniform = [&] { return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53; };
  const double scale = stddev * 255.0;
  for (std::size_t i = 0; i < out.data.size(); i += 2) {
    // Box-Muller: two normals per draw.
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double t = 2.0 * std::numbers::pi * uniform();
    const double n[2] = {r * std::cos(t), r * std::sin(t)};
    for (std::size_t k = 0; k < 2 && i + k < out.data.size(); ++k) {
      const double v = out.data[i + k] + scale * n[k];
      out.data[i + k] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
  }
  return out;
}

std::vector<unsigned char> encode_jpeg(const RgbImage& image, int quality) {
  cv::Mat bgr;
  cv::cvtColor(as_mat(image), bgr, cv::COLOR_RGB2BGR);
  std::vector<unsigned char> bytes;
  if (!cv::imencode(".jpg", bgr, bytes, {cv::IMWRITE_JPEG_QUALITY, quality})) {
    throw Error(ErrorCode::kIoError, "JPEG encoding failed");
  }
  return bytes;
}

RgbImage decode_image(const std::vector<unsigned char>& bytes) {
  const cv::Mat bgr = cv::imdecode(bytes, cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error(ErrorCode::kIoError, "cannot decode image bytes");
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return from_mat(rgb);
}

RgbImage apply_distortion(const RgbImage& image, const DistortionStep& step, std::uint64_t seed) {
  switch (step.type) {
    case DistortionType::kBlur: return gaussian_blur(image, step.parameter);
    case DistortionType::kNoise: return add_white_noise(image, step.parameter, seed);
    case DistortionType::kJpeg:
      return decode_image(encode_jpeg(image, static_cast<int>(std::lround(step.parameter))));
  }
  return image;
}

}  // namespace dsts
