#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace dsts {

inline constexpr std::size_t kMinImageSide = 224;

// 8-bit interleaved R,G,B image.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h, std::uint8_t fill = 0)
      : width(w), height(h), data(w * h * 3, fill) {}

  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t ch) {
    return data[(y * width + x) * 3 + ch];
  }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t ch) const {
    return data[(y * width + x) * 3 + ch];
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// Throws kImageTooSmall below 224 on either side, kInvalidArgument on a size/buffer mismatch.
void validate_image(const RgbImage& image);

// PNG/JPEG via OpenCV. Throws kFileNotFound or kIoError (undecodable file).
RgbImage load_image(const std::filesystem::path& path);
void save_image(const RgbImage& image, const std::filesystem::path& path);

// True for extensions the loader accepts (.png, .jpg, .jpeg; case-insensitive).
bool is_image_file(const std::filesystem::path& path);

// Image files directly inside a directory, sorted by filename.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace dsts
