// SPDX-License-Identifier: Apache-2.0
#include "rdmc/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "rdmc/error.hpp"

namespace rdmc {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::schema: return "schema";
    case ErrorCode::parse: return "parse";
    case ErrorCode::validation: return "validation";
    case ErrorCode::domain: return "domain";
    case ErrorCode::separation: return "separation";
    case ErrorCode::rank: return "rank";
    case ErrorCode::sample_size: return "sample_size";
    case ErrorCode::insufficient_support: return "insufficient_support";
    case ErrorCode::conditioning: return "conditioning";
    case ErrorCode::configuration: return "configuration";
    case ErrorCode::bandwidth_infeasible: return "bandwidth_infeasible";
    case ErrorCode::selection: return "selection";
    case ErrorCode::alignment: return "alignment";
    case ErrorCode::density_floor: return "density_floor";
    case ErrorCode::degenerate_sample: return "degenerate_sample";
    case ErrorCode::unreliable_ise: return "unreliable_ise";
    case ErrorCode::convergence: return "convergence";
  }
  return "unknown";
}

TargetOutcome::TargetOutcome(int j) : j_(j) {
  if (j != 0 && j != 1) {
    throw Error(ErrorCode::domain, "target outcome must be 0 or 1, got " + std::to_string(j));
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

bool is_missing_token(std::string_view cell) {
  static constexpr std::array<std::string_view, 8> tokens = {
      "", "NA", "na", "N/A", "NaN", "nan", "null", "."};
  return std::find(tokens.begin(), tokens.end(), cell) != tokens.end();
}

double parse_cell(std::string_view cell, std::size_t row, std::string_view column) {
  auto where = [&] {
    return "row " + std::to_string(row) + ", column '" + std::string(column) + "'";
  };
  if (is_missing_token(cell)) {
    throw Error(ErrorCode::parse, "missing value at " + where());
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::parse,
                "non-numeric value '" + std::string(cell) + "' at " + where());
  }
  return value;
}

int parse_flag(std::string_view cell, std::size_t row, std::string_view column) {
  double v = parse_cell(cell, row, column);
  if (v != 0.0 && v != 1.0) {
    throw Error(ErrorCode::parse, "flag column '" + std::string(column) +
                                      "' must be 0 or 1 at row " + std::to_string(row));
  }
  return static_cast<int>(v);
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string row_list(const std::vector<std::size_t>& rows) {
  std::ostringstream os;
  constexpr std::size_t shown = 20;
  for (std::size_t k = 0; k < rows.size() && k < shown; ++k) {
    os << (k ? ", " : "") << rows[k];
  }
  if (rows.size() > shown) os << ", ... (" << rows.size() << " total)";
  return os.str();
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, const Schema& schema,
                     const Thresholds& thresholds) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::io, "cannot open input file: " + path.string());
  }
  std::string line;
  // Leading '#' lines carry provenance comments and are skipped.
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') continue;
    have_header = true;
    break;
  }
  if (!have_header) {
    throw Error(ErrorCode::schema, "input file has no header row: " + path.string());
  }
  auto header = split(line, schema.delimiter);
  std::unordered_map<std::string, std::size_t> column_index;
  for (std::size_t k = 0; k < header.size(); ++k) {
    column_index.emplace(std::string(header[k]), k);
  }
  auto require = [&](const std::string& name) {
    auto it = column_index.find(name);
    if (it == column_index.end()) {
      throw Error(ErrorCode::schema, "missing column '" + name + "' in " + path.string());
    }
    return it->second;
  };
  const std::size_t ix = require(schema.x);
  const std::size_t id = require(schema.d);
  const std::size_t iy = require(schema.y);
  std::vector<std::size_t> iw;
  for (const auto& name : schema.w) iw.push_back(require(name));
  std::optional<std::size_t> iz;
  if (schema.z) iz = require(*schema.z);

  Dataset ds;
  ds.thresholds = thresholds;
  ds.covariate_names = schema.w;

  std::vector<std::size_t> inconsistent;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto cells = split(line, schema.delimiter);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::parse, "row " + std::to_string(row) + " has " +
                                        std::to_string(cells.size()) + " fields, header has " +
                                        std::to_string(header.size()));
    }
    UnitRecord u;
    u.x = parse_cell(cells[ix], row, schema.x);
    u.d = parse_flag(cells[id], row, schema.d);
    u.y = parse_cell(cells[iy], row, schema.y);
    u.w.reserve(iw.size());
    for (std::size_t k = 0; k < iw.size(); ++k) {
      u.w.push_back(parse_cell(cells[iw[k]], row, schema.w[k]));
    }
    const int derived = assigned_treatment(u.x, u.d, thresholds);
    if (iz) {
      u.z = parse_flag(cells[*iz], row, *schema.z);
      if (u.z != derived) inconsistent.push_back(row);
    } else {
      u.z = derived;
    }
    ds.units.push_back(std::move(u));
  }
  if (!inconsistent.empty()) {
    throw Error(ErrorCode::validation,
                "treatment column disagrees with 1(x > c_d) at rows: " + row_list(inconsistent));
  }
  auto findings = validate(ds);
  for (const auto& f : findings) {
    if (f.severity == Severity::fatal) {
      throw Error(ErrorCode::validation, f.message);
    }
  }
  return ds;
}

Schema schema_for(const Dataset& dataset, char delimiter) {
  Schema s;
  s.w = dataset.covariate_names;
  s.z = "z";
  s.delimiter = delimiter;
  return s;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path, char delimiter) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::io, "cannot open output file: " + path.string());
  }
  out << "x";
  for (const auto& name : dataset.covariate_names) out << delimiter << name;
  out << delimiter << "d" << delimiter << "z" << delimiter << "y" << '\n';
  for (const auto& u : dataset.units) {
    out << format_double(u.x);
    for (double w : u.w) out << delimiter << format_double(w);
    out << delimiter << u.d << delimiter << u.z << delimiter << format_double(u.y) << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::io, "write failed: " + path.string());
  }
}

Region region_of(const UnitRecord& unit) {
  if (unit.d == 0) return unit.z == 0 ? Region::c : Region::b;
  return unit.z == 0 ? Region::a : Region::d;
}

const char* region_label(Region r) {
  switch (r) {
    case Region::a: return "a";
    case Region::b: return "b";
    case Region::c: return "c";
    case Region::d: return "d";
  }
  return "?";
}

RegionCounts region_census(const Dataset& dataset) {
  RegionCounts counts;
  for (const auto& u : dataset.units) {
    switch (region_of(u)) {
      case Region::a: ++counts.a; break;
      case Region::b: ++counts.b; break;
      case Region::c: ++counts.c; break;
      case Region::d: ++counts.d; break;
    }
  }
  return counts;
}

std::vector<Finding> validate(const Dataset& dataset) {
  std::vector<Finding> findings;
  const auto& t = dataset.thresholds;
  if (!(t.c0 < t.c1)) {
    findings.push_back({Severity::fatal, "thresholds_order",
                        "thresholds out of order: c0 = " + format_double(t.c0) +
                            " must be strictly below c1 = " + format_double(t.c1),
                        {}});
  }

  std::vector<std::size_t> bad_dim, bad_flag, bad_z, bad_value;
  const std::size_t m = dataset.covariate_count();
  for (std::size_t i = 0; i < dataset.units.size(); ++i) {
    const auto& u = dataset.units[i];
    const std::size_t row = i + 1;
    if (u.w.size() != m) bad_dim.push_back(row);
    if ((u.d != 0 && u.d != 1) || (u.z != 0 && u.z != 1)) {
      bad_flag.push_back(row);
    } else if (u.z != assigned_treatment(u.x, u.d, t)) {
      bad_z.push_back(row);
    }
    bool finite = std::isfinite(u.x) && std::isfinite(u.y);
    for (double w : u.w) finite = finite && std::isfinite(w);
    if (!finite) bad_value.push_back(row);
  }
  if (!bad_dim.empty()) {
    findings.push_back({Severity::fatal, "covariate_dimension",
                        "covariate count differs from " + std::to_string(m) +
                            " at rows: " + row_list(bad_dim),
                        bad_dim});
  }
  if (!bad_flag.empty()) {
    findings.push_back({Severity::fatal, "flag_value",
                        "group/treatment flags outside {0,1} at rows: " + row_list(bad_flag),
                        bad_flag});
  }
  if (!bad_z.empty()) {
    findings.push_back({Severity::fatal, "treatment_rule",
                        "treatment disagrees with 1(x > c_d) at rows: " + row_list(bad_z),
                        bad_z});
  }
  if (!bad_value.empty()) {
    findings.push_back({Severity::fatal, "non_finite",
                        "non-finite values at rows: " + row_list(bad_value), bad_value});
  }

  if (bad_flag.empty()) {
    const auto counts = region_census(dataset);
    auto warn_empty = [&](std::size_t count, Region r, const char* what) {
      if (count == 0) {
        findings.push_back({Severity::warning,
                            std::string("region_") + region_label(r) + "_empty",
                            std::string("region (") + region_label(r) + ") empty: no " + what,
                            {}});
      }
    };
    warn_empty(counts.a, Region::a, "d=1 units at or below c1");
    warn_empty(counts.b, Region::b, "d=0 units above c0");
    warn_empty(counts.c, Region::c, "d=0 units at or below c0");
    warn_empty(counts.d, Region::d, "d=1 units above c1");
  }
  return findings;
}

bool has_fatal(const std::vector<Finding>& findings) {
  return std::any_of(findings.begin(), findings.end(),
                     [](const Finding& f) { return f.severity == Severity::fatal; });
}

Dataset with_derived_treatment(Dataset dataset) {
  for (auto& u : dataset.units) {
    u.z = assigned_treatment(u.x, u.d, dataset.thresholds);
  }
  return dataset;
}

}  // namespace rdmc
