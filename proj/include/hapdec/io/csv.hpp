#pragma once

// Minimal CSV dialect: comma separated, '.' decimal point, LF line endings,
// mandatory header row, no quoting (fields never contain commas).
// Doubles are written in shortest round-trip form so files are bit-exact.

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

namespace hapdec::io {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("csv: not a number: '" + std::string(s) + "'");
  return v;
}

inline long long parse_int(std::string_view s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("csv: not an integer: '" + std::string(s) + "'");
  return v;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open '" + path + "' for writing");
    row(header);
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].find_first_of(",\n\r") != std::string::npos)
        throw std::invalid_argument("csv: field contains a separator: '" + fields[i] + "'");
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
    if (!out_) throw std::runtime_error("write failed for '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

/// Whole-file reader with header-based column lookup.
class CsvTable {
 public:
  static CsvTable read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("'" + path + "' is empty (missing header)");
    for (auto f : split_fields(line)) t.header_.emplace_back(f);
    for (std::size_t i = 0; i < t.header_.size(); ++i) t.index_[t.header_[i]] = i;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::vector<std::string> row;
      for (auto f : split_fields(line)) row.emplace_back(f);
      if (row.size() != t.header_.size())
        throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected " +
                                    std::to_string(t.header_.size()) + " fields");
      t.rows_.push_back(std::move(row));
    }
    return t;
  }

  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }
  bool has(const std::string& col) const { return index_.count(col) > 0; }

  const std::string& at(std::size_t row, const std::string& col) const {
    const auto it = index_.find(col);
    if (it == index_.end()) throw std::invalid_argument("csv: missing column '" + col + "'");
    return rows_[row][it->second];
  }
  double number(std::size_t row, const std::string& col) const { return parse_double(at(row, col)); }
  long long integer(std::size_t row, const std::string& col) const { return parse_int(at(row, col)); }
  std::optional<double> optional_number(std::size_t row, const std::string& col) const {
    const auto& s = at(row, col);
    if (s.empty()) return std::nullopt;
    return parse_double(s);
  }

 private:
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace hapdec::io
