#include "dsts/image.hpp"

#include <algorithm>
#include <cctype>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <string>

#include "dsts/error.hpp"

namespace dsts {

void validate_image(const RgbImage& image) {
  if (image.data.size() != image.width * image.height * 3) {
    throw Error(ErrorCode::kInvalidArgument, "pixel buffer does not match width*height*3");
  }
  if (image.width < kMinImageSide || image.height < kMinImageSide) {
    throw Error(ErrorCode::kImageTooSmall,
                std::to_string(image.width) + "x" + std::to_string(image.height) +
                    " is below the 224x224 minimum");
  }
}

RgbImage load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kFileNotFound, path.string());
  }
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw Error(ErrorCode::kIoError, "cannot decode image " + path.string());
  }
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  RgbImage image(static_cast<std::size_t>(rgb.cols), static_cast<std::size_t>(rgb.rows));
  for (int y = 0; y < rgb.rows; ++y) {
    const auto* src = rgb.ptr<std::uint8_t>(y);
    std::copy(src, src + rgb.cols * 3, image.data.begin() + static_cast<std::ptrdiff_t>(y) * rgb.cols * 3);
  }
  return image;
}

void save_image(const RgbImage& image, const std::filesystem::path& path) {
  cv::Mat rgb(static_cast<int>(image.height), static_cast<int>(image.width), CV_8UC3,
              const_cast<std::uint8_t*>(image.data.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  if (!cv::imwrite(path.string(), bgr)) {
    throw Error(ErrorCode::kIoError, "cannot write image " + path.string());
  }
}

bool is_image_file(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kFileNotFound, "not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace dsts
