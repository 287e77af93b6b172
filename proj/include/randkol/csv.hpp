#pragma once

// CSV emission for density traces. The format is part of the tool's
// contract: header `position,count_lo,count_hi,density_lo`, one row per
// checkpoint, `\n` line endings, densities with 12 significant digits.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "randkol/errors.hpp"
#include "randkol/stats.hpp"

namespace randkol {

inline constexpr std::string_view kCsvHeader = "position,count_lo,count_hi,density_lo";

// 12 significant digits, shortest form ("0.466666666667", "0.5", "0").
inline std::string format_density(double value) {
  char buf[64];
  const int len = std::snprintf(buf, sizeof buf, "%.12g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

inline void write_csv(std::ostream& out, const DensityTrace& trace) {
  out << kCsvHeader << '\n';
  for (const TraceCheckpoint& cp : trace.checkpoints) {
    out << cp.position << ',' << cp.count_lo << ',' << cp.count_hi << ','
        << format_density(cp.density_lo) << '\n';
  }
}

inline void write_csv_file(const std::string& path, const DensityTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceLimitError("cannot open for writing: " + path);
  write_csv(out, trace);
  out.flush();
  if (!out) throw ResourceLimitError("write failed: " + path);
}

namespace detail {

template <class T>
T parse_csv_number(std::string_view field, std::size_t row) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw DomainError("csv row " + std::to_string(row) + ": malformed field '" +
                      std::string(field) + "'");
  }
  return value;
}

}  // namespace detail

// Parses CSV produced by write_csv. Rejects a missing or altered header and
// malformed rows; tolerates a trailing newline.
inline DensityTrace read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw DomainError("csv: unexpected header '" + line + "'");
  DensityTrace trace;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view rest = line;
    std::string_view fields[4];
    for (int f = 0; f < 4; ++f) {
      const std::size_t comma = rest.find(',');
      if (f < 3) {
        if (comma == std::string_view::npos) {
          throw DomainError("csv row " + std::to_string(row) + ": expected 4 fields");
        }
        fields[f] = rest.substr(0, comma);
        rest = rest.substr(comma + 1);
      } else {
        if (comma != std::string_view::npos) {
          throw DomainError("csv row " + std::to_string(row) + ": expected 4 fields");
        }
        fields[f] = rest;
      }
    }
    TraceCheckpoint cp;
    cp.position = detail::parse_csv_number<std::uint64_t>(fields[0], row);
    cp.count_lo = detail::parse_csv_number<std::uint64_t>(fields[1], row);
    cp.count_hi = detail::parse_csv_number<std::uint64_t>(fields[2], row);
    cp.density_lo = detail::parse_csv_number<double>(fields[3], row);
    trace.checkpoints.push_back(cp);
  }
  return trace;
}

inline DensityTrace read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceLimitError("cannot open for reading: " + path);
  return read_csv(in);
}

}  // namespace randkol
