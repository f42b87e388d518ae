// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace rdmc::cli {

/// Readings of the method that a user may want to audit next to every output.
struct Interpretation {
  std::string lscv_g1_range = "x > c0";
  std::string mise = "squared";
  std::string effect_variance = "sum of curve variances";
  std::string working_variance = "constant";
  std::string propensity_fit = "all units";

  bool operator==(const Interpretation&) const = default;
};

/// Overrides of the simulation design; unset fields keep the defaults.
struct SimSettings {
  std::size_t n = 2000;
  double mu_x = 4.0;
  double sigma_x = 1.7;
  double sigma_xi = 2.0;
  double sigma_eps = 10.0;
  std::string x_dist = "normal";

  bool operator==(const SimSettings&) const = default;
};

/// Fully resolved description of one invocation. Serializes to JSON; the hash
/// covers every field, so equal manifests give byte-identical tables.
struct RunManifest {
  std::string command;
  std::string tool_version;

  std::string kernel = "epanechnikov";
  std::size_t grid_points = 201;
  double c0 = 2.0;
  double c1 = 6.0;
  std::uint64_t seed = 1;
  std::string out;

  // inputs
  std::string data;
  std::string g0_path;
  std::string g1_path;
  std::string mc_table;

  // column mapping
  std::string x_col = "x";
  std::string d_col = "d";
  std::string y_col = "y";
  std::string z_col;  ///< empty derives treatment from the thresholds
  std::vector<std::string> covariates;

  // estimation
  std::string target = "both";
  std::string method = "dr";
  int ipw_group = -1;
  std::string link = "logit";
  std::vector<std::string> propensity_spec;
  std::vector<std::string> outcome_spec;
  std::optional<double> bandwidth;  ///< fixed h; empty selects by cross-validation
  std::vector<double> h_grid;
  std::size_t h_points = 20;
  bool refine = false;
  bool variance = false;
  double level = 0.95;
  std::optional<std::vector<double>> normal_density;  ///< {mean, sd}

  // threshold
  std::optional<double> mc;
  std::size_t resolution = 1001;

  // simulation and benchmark
  SimSettings sim;
  std::size_t reps = 100;
  std::string cells = "table1";

  Interpretation interpretation;

  bool operator==(const RunManifest&) const = default;
};

nlohmann::json to_json(const RunManifest& manifest);
/// Throws std::runtime_error on malformed input.
RunManifest manifest_from_json(const nlohmann::json& j);

/// 64-bit FNV-1a of the canonical JSON form, as 16 hex digits.
std::string manifest_hash(const RunManifest& manifest);
std::string fnv1a_hex(const std::string& bytes);

}  // namespace rdmc::cli
