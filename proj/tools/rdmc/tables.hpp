// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdmc::cli {

/// Input that cannot be read or parsed; reported with exit status 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form; "nan" for NaN.
std::string format_number(double v);
/// Accepts anything format_number produces.
double parse_number(const std::string& text, const std::string& context);

std::vector<std::string> split(const std::string& line, char delim = ',');

/// Writes '#' comment lines, a header row and the rows, comma separated.
void write_table(const std::filesystem::path& path, const std::vector<std::string>& comments,
                 const std::vector<std::string>& columns,
                 const std::vector<std::vector<std::string>>& rows);

struct Table {
  std::vector<std::string> comments;  ///< without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Throws InputError when the column is absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> numbers(const std::string& name) const;
  /// key=value pairs from the comment line starting with `tag`.
  std::map<std::string, std::string> tagged(const std::string& tag) const;
};

Table read_table(const std::filesystem::path& path);

/// Columns of the first non-comment line.
std::vector<std::string> read_header(const std::filesystem::path& path);

/// Curve written by `fit`: metadata line "curve target=g0 method=dr ..."
/// followed by x, ghat, slope and optionally variance columns.
struct CurveTable {
  int target = 0;
  std::string method;
  std::string kernel;
  double h = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;
  std::vector<double> x;
  std::vector<double> ghat;
  std::vector<double> slope;
  std::optional<std::vector<double>> variance;
};

CurveTable read_curve_table(const std::filesystem::path& path);

}  // namespace rdmc::cli
