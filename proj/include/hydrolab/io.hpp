#pragma once

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hydrolab {

/// %.17g, with nan and inf spelled out.
std::string format_double(double v);

/// A small CSV table of pre-formatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row() {
    rows_.emplace_back();
    return *this;
  }
  CsvTable& cell(double v);
  CsvTable& cell(long v);
  CsvTable& cell(int v) { return cell(static_cast<long>(v)); }
  CsvTable& cell(std::size_t v) { return cell(static_cast<long>(v)); }
  CsvTable& cell(const std::string& v);
  CsvTable& cell(const char* v) { return cell(std::string(v)); }

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::filesystem::path& path, std::string_view text);

/// JSON text with every floating-point number at 17 significant digits and
/// sorted object keys.
std::string to_json_text(const nlohmann::json& j, int indent = 2);

/// FNV-1a 64-bit hash, printed as 16 hex digits.
std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t v);

}  // namespace hydrolab
