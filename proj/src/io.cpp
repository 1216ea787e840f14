#include "hydrolab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hydrolab {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable& CsvTable::cell(double v) { return cell(format_double(v)); }

CsvTable& CsvTable::cell(long v) { return cell(std::to_string(v)); }

CsvTable& CsvTable::cell(const std::string& v) {
  if (rows_.empty()) throw std::logic_error("CsvTable: cell before row");
  if (rows_.back().size() == header_.size()) throw std::logic_error("CsvTable: too many cells in a row");
  const bool quote = v.find_first_of(",\"\n") != std::string::npos;
  if (!quote) {
    rows_.back().push_back(v);
    return *this;
  }
  std::string q = "\"";
  for (char c : v) {
    if (c == '"') q += '"';
    q += c;
  }
  rows_.back().push_back(q + "\"");
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) {
    if (r.size() != header_.size()) throw std::logic_error("CsvTable: short row");
    line(r);
  }
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write to " + path.string() + " failed");
}

namespace {

void emit(const nlohmann::json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ',';
          out += nl;
        }
        first = false;
        out += pad;
        out += nlohmann::json(it.key()).dump();
        out += indent > 0 ? ": " : ":";
        emit(it.value(), indent, depth + 1, out);
      }
      out += nl;
      out += close;
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      out += nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) {
          out += ',';
          out += nl;
        }
        out += pad;
        emit(j[i], indent, depth + 1, out);
      }
      out += nl;
      out += close;
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      // JSON has no nan or inf
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string to_json_text(const nlohmann::json& j, int indent) {
  std::string out;
  emit(j, indent, 0, out);
  out += '\n';
  return out;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace hydrolab
