#include "dsts/stats_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "dsts/error.hpp"

namespace dsts {
namespace {

constexpr char kMagic[4] = {'D', 'S', 'T', 'S'};
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 8;

template <typename T>
void put(std::vector<unsigned char>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFFu));
  }
}

template <typename T>
T get(const unsigned char* in) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(in[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

std::uint32_t checksum(const unsigned char* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, data, static_cast<uInt>(size)));
}

}  // namespace

void save_stats(const GaussianStats& stats, const std::filesystem::path& path) {
  const std::size_t c = stats.dims();
  if (stats.covariance.rows() != c || stats.covariance.cols() != c) {
    throw Error(ErrorCode::kDimensionMismatch, "covariance does not match mean length");
  }
  std::vector<unsigned char> buf;
  buf.reserve(kHeaderSize + 8 * (c + c * c) + 4);
  buf.insert(buf.end(), std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(buf, kStatsFormatVersion);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(c));
  put<std::uint64_t>(buf, stats.sample_count);
  for (double v : stats.mean) put<double>(buf, v);
  for (double v : stats.covariance.data()) put<double>(buf, v);
  put<std::uint32_t>(buf, checksum(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

GaussianStats load_stats(const std::filesystem::path& path, std::size_t expected_dims) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  const std::vector<unsigned char> buf{std::istreambuf_iterator<char>(in),
                                       std::istreambuf_iterator<char>()};
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    if (buf.size() < 4) throw Error(ErrorCode::kChecksumError, "truncated stats file");
    throw Error(ErrorCode::kVersionMismatch, "not a DSTS stats file");
  }
  if (buf.size() < kHeaderSize + 4) throw Error(ErrorCode::kChecksumError, "truncated stats file");
  const auto version = get<std::uint32_t>(buf.data() + 4);
  if (version != kStatsFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch, "stats format version " + std::to_string(version) +
                                                 ", engine reads " +
                                                 std::to_string(kStatsFormatVersion));
  }
  const std::size_t c = get<std::uint32_t>(buf.data() + 8);
  const std::size_t expected_size = kHeaderSize + 8 * (c + c * c) + 4;
  if (buf.size() != expected_size) {
    throw Error(ErrorCode::kChecksumError, "stats file is " + std::to_string(buf.size()) +
                                               " bytes, header implies " +
                                               std::to_string(expected_size));
  }
  const std::size_t payload = expected_size - 4;
  if (checksum(buf.data(), payload) != get<std::uint32_t>(buf.data() + payload)) {
    throw Error(ErrorCode::kChecksumError, "CRC32 mismatch in " + path.string());
  }
  if (c != expected_dims) {
    throw Error(ErrorCode::kDimensionMismatch, "stats file has c=" + std::to_string(c) +
                                                   ", engine expects c=" +
                                                   std::to_string(expected_dims));
  }

  GaussianStats stats;
  stats.provenance = Provenance::kOuter;
  stats.sample_count = get<std::uint64_t>(buf.data() + 12);
  stats.mean.resize(c);
  stats.covariance = Matrix(c, c);
  const unsigned char* p = buf.data() + kHeaderSize;
  for (std::size_t i = 0; i < c; ++i, p += 8) stats.mean[i] = get<double>(p);
  for (double& v : stats.covariance.data()) {
    v = get<double>(p);
    p += 8;
  }
  return stats;
}

}  // namespace dsts
