// SPDX-License-Identifier: Apache-2.0
#include "manifest.hpp"

#include <cstdio>
#include <stdexcept>

namespace rdmc::cli {

using nlohmann::json;

namespace {

bool uses_data(const std::string& command) {
  return command == "fit" || command == "bandwidth" || command == "threshold";
}

bool estimates(const std::string& command) { return command == "fit" || command == "bandwidth"; }

bool simulates(const std::string& command) { return command == "simulate" || command == "bench"; }

template <typename T>
void read_if(const json& j, const char* key, T& field) {
  if (j.contains(key)) j.at(key).get_to(field);
}

}  // namespace

json to_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["tool_version"] = m.tool_version;
  j["kernel"] = m.kernel;
  j["grid_points"] = m.grid_points;
  j["thresholds"] = {{"c0", m.c0}, {"c1", m.c1}};
  j["seed"] = m.seed;
  j["out"] = m.out;

  json inputs = json::object();
  if (!m.data.empty()) inputs["data"] = m.data;
  if (!m.g0_path.empty()) inputs["g0"] = m.g0_path;
  if (!m.g1_path.empty()) inputs["g1"] = m.g1_path;
  if (!m.mc_table.empty()) inputs["mc_table"] = m.mc_table;
  j["inputs"] = inputs;

  if (uses_data(m.command)) {
    j["columns"] = {{"x", m.x_col},
                    {"d", m.d_col},
                    {"y", m.y_col},
                    {"z", m.z_col},
                    {"covariates", m.covariates}};
  }
  if (estimates(m.command)) {
    j["target"] = m.target;
    j["method"] = m.method;
    j["ipw_group"] = m.ipw_group;
    j["link"] = m.link;
    j["feature_specs"] = {{"propensity", m.propensity_spec}, {"outcome", m.outcome_spec}};
    j["bandwidth"] = m.bandwidth ? json(*m.bandwidth) : json(nullptr);
    j["h_grid"] = m.h_grid;
    j["h_points"] = m.h_points;
    j["refine"] = m.refine;
    j["variance"] = m.variance;
  }
  if (m.command == "fit" || m.command == "threshold") {
    j["normal_density"] = m.normal_density ? json(*m.normal_density) : json(nullptr);
  }
  if (m.command == "effect") j["level"] = m.level;
  if (m.command == "threshold") {
    j["mc"] = m.mc ? json(*m.mc) : json(nullptr);
    j["resolution"] = m.resolution;
  }
  if (simulates(m.command)) {
    j["simulation"] = {{"n", m.sim.n},
                       {"mu_x", m.sim.mu_x},
                       {"sigma_x", m.sim.sigma_x},
                       {"sigma_xi", m.sim.sigma_xi},
                       {"sigma_eps", m.sim.sigma_eps},
                       {"x_dist", m.sim.x_dist}};
  }
  if (m.command == "bench") {
    j["reps"] = m.reps;
    j["cells"] = m.cells;
    j["bandwidth"] = m.bandwidth ? json(*m.bandwidth) : json(nullptr);
    j["h_points"] = m.h_points;
  }
  j["interpretation"] = {{"lscv_g1_range", m.interpretation.lscv_g1_range},
                         {"mise", m.interpretation.mise},
                         {"effect_variance", m.interpretation.effect_variance},
                         {"working_variance", m.interpretation.working_variance},
                         {"propensity_fit", m.interpretation.propensity_fit}};
  return j;
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    j.at("command").get_to(m.command);
    read_if(j, "tool_version", m.tool_version);
    read_if(j, "kernel", m.kernel);
    read_if(j, "grid_points", m.grid_points);
    if (j.contains("thresholds")) {
      j.at("thresholds").at("c0").get_to(m.c0);
      j.at("thresholds").at("c1").get_to(m.c1);
    }
    read_if(j, "seed", m.seed);
    read_if(j, "out", m.out);
    if (j.contains("inputs")) {
      const auto& in = j.at("inputs");
      read_if(in, "data", m.data);
      read_if(in, "g0", m.g0_path);
      read_if(in, "g1", m.g1_path);
      read_if(in, "mc_table", m.mc_table);
    }
    if (j.contains("columns")) {
      const auto& c = j.at("columns");
      read_if(c, "x", m.x_col);
      read_if(c, "d", m.d_col);
      read_if(c, "y", m.y_col);
      read_if(c, "z", m.z_col);
      read_if(c, "covariates", m.covariates);
    }
    read_if(j, "target", m.target);
    read_if(j, "method", m.method);
    read_if(j, "ipw_group", m.ipw_group);
    read_if(j, "link", m.link);
    if (j.contains("feature_specs")) {
      read_if(j.at("feature_specs"), "propensity", m.propensity_spec);
      read_if(j.at("feature_specs"), "outcome", m.outcome_spec);
    }
    if (j.contains("bandwidth") && !j.at("bandwidth").is_null()) {
      m.bandwidth = j.at("bandwidth").get<double>();
    }
    read_if(j, "h_grid", m.h_grid);
    read_if(j, "h_points", m.h_points);
    read_if(j, "refine", m.refine);
    read_if(j, "variance", m.variance);
    if (j.contains("normal_density") && !j.at("normal_density").is_null()) {
      m.normal_density = j.at("normal_density").get<std::vector<double>>();
    }
    read_if(j, "level", m.level);
    if (j.contains("mc") && !j.at("mc").is_null()) m.mc = j.at("mc").get<double>();
    read_if(j, "resolution", m.resolution);
    if (j.contains("simulation")) {
      const auto& s = j.at("simulation");
      read_if(s, "n", m.sim.n);
      read_if(s, "mu_x", m.sim.mu_x);
      read_if(s, "sigma_x", m.sim.sigma_x);
      read_if(s, "sigma_xi", m.sim.sigma_xi);
      read_if(s, "sigma_eps", m.sim.sigma_eps);
      read_if(s, "x_dist", m.sim.x_dist);
    }
    read_if(j, "reps", m.reps);
    read_if(j, "cells", m.cells);
    if (j.contains("interpretation")) {
      const auto& i = j.at("interpretation");
      read_if(i, "lscv_g1_range", m.interpretation.lscv_g1_range);
      read_if(i, "mise", m.interpretation.mise);
      read_if(i, "effect_variance", m.interpretation.effect_variance);
      read_if(i, "working_variance", m.interpretation.working_variance);
      read_if(i, "propensity_fit", m.interpretation.propensity_fit);
    }
    return m;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed manifest: ") + e.what());
  }
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string manifest_hash(const RunManifest& manifest) {
  return fnv1a_hex(to_json(manifest).dump());
}

}  // namespace rdmc::cli
