#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "lsbeta/error.hpp"

namespace lsbeta {

// A delimited text file split into trimmed cells. Blank lines are dropped but
// the original 1-based line number of every kept row is remembered so errors
// can point back into the file.
struct Table {
  std::string path;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::string where(std::size_t row) const {
    return path + ":" + std::to_string(line_numbers.at(row));
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    const auto piece = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    out.emplace_back(trim(piece));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

// Reads a comma- or tab-delimited file. The delimiter is taken from the first
// non-blank line: tab if it contains one, comma otherwise.
inline Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  Table table;
  table.path = path;
  std::string line;
  char delim = 0;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    if (delim == 0) delim = line.find('\t') != std::string::npos ? '\t' : ',';
    table.rows.push_back(detail::split(line, delim));
    table.line_numbers.push_back(lineno);
  }
  return table;
}

// Shortest representation that parses back to the identical double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  if (s == "NA" || s == "NaN" || s == "nan") {
    out = std::nan("");
    return true;
  }
  if (s == "Inf" || s == "inf") {
    out = HUGE_VAL;
    return true;
  }
  if (s == "-Inf" || s == "-inf") {
    out = -HUGE_VAL;
    return true;
  }
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

class DelimitedWriter {
 public:
  explicit DelimitedWriter(std::ostream& out, char delim = ',') : out_(out), delim_(delim) {}

  template <typename Range>
  void row(const Range& cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) out_ << delim_;
      out_ << c;
      first = false;
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
  char delim_;
};

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace lsbeta
