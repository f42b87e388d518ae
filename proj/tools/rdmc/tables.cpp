// SPDX-License-Identifier: Apache-2.0
#include "tables.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rdmc::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& text, const std::string& context) {
  if (text == "nan" || text == "NaN") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || text.empty()) {
    throw InputError("not a number '" + text + "' in " + context);
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, delim)) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& comments,
                 const std::vector<std::string>& columns,
                 const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write output file: " + path.string());
  for (const auto& c : comments) out << "# " << c << '\n';
  for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << columns[k];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
    out << '\n';
  }
  if (!out) throw InputError("failed while writing " + path.string());
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] == name) return k;
  }
  throw InputError("missing column '" + name + "'");
}

std::vector<double> Table::numbers(const std::string& name) const {
  const std::size_t k = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.push_back(parse_number(rows[r][k], "column '" + name + "' row " + std::to_string(r + 1)));
  }
  return out;
}

std::map<std::string, std::string> Table::tagged(const std::string& tag) const {
  std::map<std::string, std::string> out;
  for (const auto& c : comments) {
    if (c.rfind(tag + " ", 0) != 0) continue;
    std::istringstream in(c.substr(tag.size() + 1));
    std::string kv;
    while (in >> kv) {
      const auto eq = kv.find('=');
      if (eq != std::string::npos) out[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
  }
  return out;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("input file not found: " + path.string());
  Table t;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header && line.front() == '#') {
      t.comments.push_back(line.size() > 1 && line[1] == ' ' ? line.substr(2) : line.substr(1));
      continue;
    }
    if (!header) {
      t.columns = split(line);
      header = true;
      continue;
    }
    auto cells = split(line);
    if (cells.size() != t.columns.size()) {
      throw InputError(path.string() + ": row " + std::to_string(t.rows.size() + 1) + " has " +
                       std::to_string(cells.size()) + " fields, expected " +
                       std::to_string(t.columns.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!header) throw InputError(path.string() + ": no header row");
  return t;
}

std::vector<std::string> read_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("input file not found: " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    return split(line);
  }
  throw InputError(path.string() + ": no header row");
}

CurveTable read_curve_table(const std::filesystem::path& path) {
  const Table t = read_table(path);
  const auto meta = t.tagged("curve");
  auto need = [&](const char* key) {
    auto it = meta.find(key);
    if (it == meta.end()) {
      throw InputError(path.string() + ": curve metadata lacks '" + key + "'");
    }
    return it->second;
  };
  CurveTable c;
  const std::string target = need("target");
  if (target != "g0" && target != "g1") {
    throw InputError(path.string() + ": unknown curve target '" + target + "'");
  }
  c.target = target == "g1" ? 1 : 0;
  c.method = need("method");
  c.kernel = need("kernel");
  c.h = parse_number(need("h"), path.string());
  c.c0 = parse_number(need("c0"), path.string());
  c.c1 = parse_number(need("c1"), path.string());
  try {
    c.x = t.numbers("x");
    c.ghat = t.numbers("ghat");
    c.slope = t.numbers("slope");
    bool has_variance = false;
    for (const auto& col : t.columns) has_variance = has_variance || col == "variance";
    if (has_variance) c.variance = t.numbers("variance");
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  if (c.x.empty()) throw InputError(path.string() + ": curve has no rows");
  return c;
}

}  // namespace rdmc::cli
