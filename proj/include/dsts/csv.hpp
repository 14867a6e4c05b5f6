#pragma once

#include <filesystem>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace dsts {

// Comma-separated rows with surrounding whitespace trimmed; blank lines skipped.
// No quoting: ids and values never contain commas.
std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path);

// `id,value` file with an optional header row (detected by a non-numeric value).
std::vector<std::pair<std::string, double>> read_id_values(const std::filesystem::path& path);

// `subject_id,image_id,rating` with an optional header row.
std::vector<std::tuple<std::string, std::string, int>> read_ratings(
    const std::filesystem::path& path);

}  // namespace dsts
