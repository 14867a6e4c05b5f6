#pragma once

#include <cstdint>
#include <filesystem>

#include "dsts/statistics.hpp"

namespace dsts {

// Binary ".dsts" layout, all little-endian:
//   "DSTS" | version u32 | c u32 | sample_count u64 | mean f64[c] | cov f64[c*c] row-major
//   | CRC32 u32 over every preceding byte
inline constexpr std::uint32_t kStatsFormatVersion = 1;

void save_stats(const GaussianStats& stats, const std::filesystem::path& path);

// Throws kFileNotFound, kVersionMismatch (bad magic or version), kChecksumError
// (truncated or corrupted), or kDimensionMismatch when c != expected_dims.
GaussianStats load_stats(const std::filesystem::path& path, std::size_t expected_dims);

}  // namespace dsts
