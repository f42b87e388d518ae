// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rdmc {

/// One observation of the two-group sharp design. Only the realized outcome is
/// stored; which potential outcome it is follows from `z`.
struct UnitRecord {
  double x = 0.0;          ///< running variable
  std::vector<double> w;   ///< covariates other than x
  int d = 0;               ///< group: 0 uses threshold c0, 1 uses c1
  int z = 0;               ///< treatment, always 1(x > c_d)
  double y = 0.0;          ///< realized outcome
};

struct Thresholds {
  double c0 = 0.0;
  double c1 = 0.0;

  double for_group(int d) const { return d == 1 ? c1 : c0; }
};

/// Selects which counterfactual curve is the estimand: g0 (j = 0) or g1 (j = 1).
class TargetOutcome {
 public:
  constexpr TargetOutcome() = default;
  explicit TargetOutcome(int j);

  int j() const { return j_; }
  bool operator==(const TargetOutcome&) const = default;

  /// Units whose x lies where g_j is estimated: x < c1 for g0, x > c0 for g1.
  bool in_range(double x, const Thresholds& t) const {
    return j_ == 0 ? x < t.c1 : x > t.c0;
  }
  /// True when the unit's realized outcome is Y_j.
  bool observed(const UnitRecord& u) const { return u.z == j_; }

 private:
  int j_ = 0;
};

/// Treatment rule of the sharp design: strictly above the group's threshold.
inline int assigned_treatment(double x, int d, const Thresholds& t) {
  return x > t.for_group(d) ? 1 : 0;
}

/// Immutable once built; constructors do not validate, `load_dataset` and the
/// simulator only ever hand out datasets that passed `validate` without fatal
/// findings.
struct Dataset {
  std::vector<UnitRecord> units;
  Thresholds thresholds;
  std::vector<std::string> covariate_names;

  std::size_t size() const { return units.size(); }
  std::size_t covariate_count() const { return covariate_names.size(); }
};

/// Column mapping for delimited input. Covariates are read in the listed order.
struct Schema {
  std::string x = "x";
  std::string d = "d";
  std::string y = "y";
  std::vector<std::string> w;
  std::optional<std::string> z;
  char delimiter = ',';
};

Dataset load_dataset(const std::filesystem::path& path, const Schema& schema,
                     const Thresholds& thresholds);

/// Writes columns x, w..., d, z, y with shortest round-trip number formatting.
void write_dataset(const Dataset& dataset, const std::filesystem::path& path,
                   char delimiter = ',');

/// Schema that reads back what `write_dataset` produced for this dataset.
Schema schema_for(const Dataset& dataset, char delimiter = ',');

enum class Severity { warning, fatal };

struct Finding {
  Severity severity = Severity::warning;
  std::string code;
  std::string message;
  std::vector<std::size_t> rows;
};

std::vector<Finding> validate(const Dataset& dataset);
bool has_fatal(const std::vector<Finding>& findings);

/// The four cells of the design: (c) {d=0,z=0}, (b) {d=0,z=1}, (a) {d=1,z=0},
/// (d) {d=1,z=1}.
enum class Region { c, b, a, d };

Region region_of(const UnitRecord& unit);
const char* region_label(Region r);

struct RegionCounts {
  std::size_t c = 0;  // d=0, z=0
  std::size_t b = 0;  // d=0, z=1
  std::size_t a = 0;  // d=1, z=0
  std::size_t d = 0;  // d=1, z=1

  std::size_t total() const { return a + b + c + d; }
};

RegionCounts region_census(const Dataset& dataset);

/// Recomputes z for every unit from (x, d, thresholds).
Dataset with_derived_treatment(Dataset dataset);

}  // namespace rdmc
