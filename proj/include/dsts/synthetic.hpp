#pragma once

#include <cstddef>
#include <cstdint>

#include "dsts/image.hpp"

namespace dsts {

// Procedural "pristine" image: smooth colour gradient, 1/f-style oriented
// gratings and sharp-edged shapes with their own textures. Pure function of
// (width, height, seed).
RgbImage make_textured_image(std::size_t width, std::size_t height, std::uint64_t seed);

}  // namespace dsts
