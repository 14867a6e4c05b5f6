#include "dsts/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dsts/error.hpp"

namespace dsts {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

template <typename T>
bool parse(const std::string& text, T& out) {
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::vector<std::pair<std::string, double>> read_id_values(const std::filesystem::path& path) {
  const auto rows = read_csv_rows(path);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() < 2) {
      throw Error(ErrorCode::kInvalidArgument,
                  path.string() + ":" + std::to_string(i + 1) + ": expected 'id,value'");
    }
    double v = 0.0;
    if (!parse(row[1], v)) {
      if (i == 0) continue;  // header
      throw Error(ErrorCode::kInvalidArgument,
                  path.string() + ":" + std::to_string(i + 1) + ": bad value '" + row[1] + "'");
    }
    out.emplace_back(row[0], v);
  }
  return out;
}

std::vector<std::tuple<std::string, std::string, int>> read_ratings(
    const std::filesystem::path& path) {
  const auto rows = read_csv_rows(path);
  std::vector<std::tuple<std::string, std::string, int>> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() < 3) {
      throw Error(ErrorCode::kInvalidArgument, path.string() + ":" + std::to_string(i + 1) +
                                                   ": expected 'subject_id,image_id,rating'");
    }
    int rating = 0;
    if (!parse(row[2], rating)) {
      if (i == 0) continue;
      throw Error(ErrorCode::kInvalidArgument,
                  path.string() + ":" + std::to_string(i + 1) + ": bad rating '" + row[2] + "'");
    }
    out.emplace_back(row[0], row[1], rating);
  }
  return out;
}

}  // namespace dsts
