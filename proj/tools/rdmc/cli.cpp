// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "rdmc/rdmc.h"
#include "tables.hpp"

namespace rdmc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---- C API plumbing -------------------------------------------------------

struct ApiError : std::runtime_error {
  ApiError(rdmc_status s, const std::string& what) : std::runtime_error(what), status(s) {}
  rdmc_status status;
};

void check(rdmc_status s) {
  if (s != RDMC_OK) {
    throw ApiError(s, std::string(rdmc_status_name(s)) + ": " + rdmc_last_error());
  }
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

template <typename T, void (*Free)(T*)>
using Owned = std::unique_ptr<T, Deleter<T, Free>>;

using Dataset = Owned<rdmc_dataset, rdmc_dataset_free>;
using Propensity = Owned<rdmc_propensity, rdmc_propensity_free>;
using Outcome = Owned<rdmc_outcome, rdmc_outcome_free>;
using Curve = Owned<rdmc_curve, rdmc_curve_free>;
using Bandwidth = Owned<rdmc_bandwidth, rdmc_bandwidth_free>;
using Density = Owned<rdmc_density, rdmc_density_free>;
using Effect = Owned<rdmc_effect, rdmc_effect_free>;
using Threshold = Owned<rdmc_threshold, rdmc_threshold_free>;
using Bench = Owned<rdmc_bench, rdmc_bench_free>;

template <typename Handle, typename Fn>
Handle make(Fn&& fn) {
  typename Handle::pointer raw = nullptr;
  check(fn(&raw));
  return Handle(raw);
}

// ---- option vocabularies ----------------------------------------------------

const std::vector<std::string> kKernels{"epanechnikov", "gaussian", "triangular"};
const std::vector<std::string> kMethods{"naive", "ipw", "dr"};

rdmc_kernel kernel_of(const std::string& name) {
  if (name == "gaussian") return RDMC_KERNEL_GAUSSIAN;
  if (name == "triangular") return RDMC_KERNEL_TRIANGULAR;
  if (name == "epanechnikov") return RDMC_KERNEL_EPANECHNIKOV;
  throw UsageError("unknown kernel '" + name + "'");
}

rdmc_method method_of(const std::string& name) {
  if (name == "naive") return RDMC_METHOD_NAIVE;
  if (name == "ipw") return RDMC_METHOD_IPW;
  if (name == "dr") return RDMC_METHOD_DR;
  throw UsageError("unknown method '" + name + "'");
}

std::string join(const std::vector<std::string>& parts, const char* sep = ",") {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) out += (k ? sep : "") + parts[k];
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto& s : split(text, ',')) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(s.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) {
    try {
      out.push_back(parse_number(s, flag));
    } catch (const InputError& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

// Covariates default to every column that is not x, d, y or z.
void resolve_covariates(RunManifest& m) {
  if (!m.covariates.empty() || m.data.empty()) return;
  std::vector<std::string> header;
  try {
    header = read_header(m.data);
  } catch (const InputError&) {
    return;  // reported by execute as a missing input
  }
  for (const auto& col : header) {
    if (col == m.x_col || col == m.d_col || col == m.y_col || col == m.z_col || col == "z") {
      continue;
    }
    m.covariates.push_back(col);
  }
}

void resolve_specs(RunManifest& m, const std::string& propensity, const std::string& outcome) {
  const bool needs_pi = m.method != "naive";
  const bool needs_delta = m.method == "dr";
  if (!needs_pi && !propensity.empty()) {
    throw UsageError("--propensity-spec has no effect with --method " + m.method);
  }
  if (!needs_delta && !outcome.empty()) {
    throw UsageError("--outcome-spec applies to --method dr only");
  }
  if (needs_pi) {
    if (!propensity.empty()) {
      m.propensity_spec = split_list(propensity);
    } else {
      m.propensity_spec = {"1", "x"};
      for (std::size_t k = 0; k < m.covariates.size(); ++k) {
        m.propensity_spec.push_back("w" + std::to_string(k + 1));
      }
    }
  }
  if (needs_delta) {
    if (!outcome.empty()) {
      m.outcome_spec = split_list(outcome);
    } else {
      m.outcome_spec = {"1", "x", "x^2"};
      for (std::size_t k = 0; k < m.covariates.size(); ++k) {
        m.outcome_spec.push_back("w" + std::to_string(k + 1));
      }
    }
  }
}

std::optional<std::vector<double>> parse_normal_density(const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto v = parse_number_list(text, "--normal-density");
  if (v.size() != 2 || !(v[1] > 0.0)) {
    throw UsageError("--normal-density expects MEAN,SD with SD > 0");
  }
  return v;
}

// ---- output helpers ---------------------------------------------------------

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string header_line(const RunManifest& m) {
  return "rdmc " + m.command + " manifest=" + manifest_hash(m) + " version=" + m.tool_version;
}

void write_sidecar(const std::string& output, const RunManifest& m, const json& results,
                   const json& error = nullptr) {
  json j;
  j["manifest"] = to_json(m);
  j["manifest_hash"] = manifest_hash(m);
  j["created_utc"] = utc_timestamp();
  j["results"] = results;
  if (!error.is_null()) j["error"] = error;
  std::ofstream out(sidecar_path(output), std::ios::trunc);
  out << j.dump(2) << '\n';
}

std::string suffixed(const std::string& out, const std::string& suffix) {
  const fs::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

std::string num(double v) { return format_number(v); }

// ---- commands -----------------------------------------------------------------

rdmc_sim_config sim_config(const RunManifest& m) {
  rdmc_sim_config c;
  rdmc_sim_config_default(&c);
  c.n = m.sim.n;
  c.mu_x = m.sim.mu_x;
  c.sigma_x = m.sim.sigma_x;
  c.sigma_xi = m.sim.sigma_xi;
  c.sigma_eps = m.sim.sigma_eps;
  c.c0 = m.c0;
  c.c1 = m.c1;
  c.x_dist = m.sim.x_dist == "lognormal" ? RDMC_X_LOGNORMAL : RDMC_X_NORMAL;
  return c;
}

Dataset load_data(const RunManifest& m) {
  if (!fs::exists(m.data)) throw InputError("input file not found: " + m.data);
  std::vector<const char*> covs;
  for (const auto& c : m.covariates) covs.push_back(c.c_str());
  rdmc_schema schema{m.x_col.c_str(),
                     m.d_col.c_str(),
                     m.y_col.c_str(),
                     m.z_col.empty() ? nullptr : m.z_col.c_str(),
                     covs.data(),
                     covs.size(),
                     ','};
  return make<Dataset>(
      [&](rdmc_dataset** out) { return rdmc_dataset_load(m.data.c_str(), &schema, m.c0, m.c1, out); });
}

Density data_density(const rdmc_dataset* ds) {
  std::vector<double> xs(rdmc_dataset_size(ds));
  check(rdmc_dataset_running_variable(ds, xs.data(), xs.size()));
  return make<Density>([&](rdmc_density** out) { return rdmc_density_kde(xs.data(), xs.size(), out); });
}

int cmd_simulate(const RunManifest& m, std::ostream& out) {
  const auto config = sim_config(m);
  auto ds = make<Dataset>([&](rdmc_dataset** o) { return rdmc_simulate(&config, m.seed, o); });
  check(rdmc_dataset_write(ds.get(), m.out.c_str()));

  // Prepend the provenance header to the written table.
  std::string body;
  {
    std::ifstream in(m.out, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    body = ss.str();
  }
  {
    std::ofstream o(m.out, std::ios::binary | std::ios::trunc);
    o << "# " << header_line(m) << '\n'
      << "# units: x running variable; w covariates; d group (0 uses c0, 1 uses c1); "
         "z treatment; y outcome\n"
      << body;
  }
  std::size_t counts[4];
  rdmc_dataset_region_counts(ds.get(), counts);
  json results{{"n", rdmc_dataset_size(ds.get())},
               {"regions", {{"c", counts[0]}, {"b", counts[1]}, {"a", counts[2]}, {"d", counts[3]}}}};
  write_sidecar(m.out, m, results);
  out << "wrote " << rdmc_dataset_size(ds.get()) << " units to " << m.out << '\n';
  return kExitOk;
}

struct NuisanceFits {
  Propensity propensity;
  Outcome outcome[2];
};

rdmc_estimator estimator_of(const RunManifest& m) {
  return {method_of(m.method), m.ipw_group, kernel_of(m.kernel)};
}

void fit_nuisances(const RunManifest& m, const rdmc_dataset* ds, const std::vector<int>& targets,
                   NuisanceFits& fits, json& results) {
  if (!m.propensity_spec.empty()) {
    const auto spec = join(m.propensity_spec);
    const rdmc_link link = m.link == "probit" ? RDMC_LINK_PROBIT : RDMC_LINK_LOGIT;
    fits.propensity = make<Propensity>(
        [&](rdmc_propensity** o) { return rdmc_propensity_fit(ds, spec.c_str(), link, o); });
    std::vector<double> coef(rdmc_propensity_coefficients(fits.propensity.get(), nullptr, 0));
    rdmc_propensity_coefficients(fits.propensity.get(), coef.data(), coef.size());
    results["propensity"] = {{"spec", m.propensity_spec},
                             {"coefficients", coef},
                             {"converged", rdmc_propensity_converged(fits.propensity.get()) == 1},
                             {"iterations", rdmc_propensity_iterations(fits.propensity.get())}};
  }
  if (!m.outcome_spec.empty()) {
    const auto spec = join(m.outcome_spec);
    for (int j : targets) {
      fits.outcome[j] = make<Outcome>(
          [&](rdmc_outcome** o) { return rdmc_outcome_fit(ds, j, spec.c_str(), o); });
      std::vector<double> coef(rdmc_outcome_coefficients(fits.outcome[j].get(), nullptr, 0));
      rdmc_outcome_coefficients(fits.outcome[j].get(), coef.data(), coef.size());
      results["outcome_g" + std::to_string(j)] = {{"spec", m.outcome_spec}, {"coefficients", coef}};
    }
  }
}

json failures_of(const rdmc_curve* curve) {
  json list = json::array();
  for (std::size_t i = 0; i < rdmc_curve_failure_count(curve); ++i) {
    std::size_t index = 0;
    double x = 0.0;
    rdmc_status code = RDMC_OK;
    const char* message = nullptr;
    check(rdmc_curve_failure(curve, i, &index, &x, &code, &message));
    list.push_back({{"index", index}, {"x", x}, {"code", rdmc_status_name(code)}, {"message", message}});
  }
  return list;
}

int cmd_fit(const RunManifest& m, std::ostream& out, std::ostream& err) {
  auto ds = load_data(m);
  const std::vector<int> targets =
      m.target == "both" ? std::vector<int>{0, 1} : std::vector<int>{m.target == "1" ? 1 : 0};
  json results = json::object();
  NuisanceFits fits;
  fit_nuisances(m, ds.get(), targets, fits, results);
  const auto est = estimator_of(m);

  Density density;
  if (m.variance) {
    if (m.normal_density) {
      density = make<Density>([&](rdmc_density** o) {
        return rdmc_density_normal((*m.normal_density)[0], (*m.normal_density)[1], o);
      });
    } else {
      density = data_density(ds.get());
    }
  }

  int status = kExitOk;
  std::vector<std::pair<std::string, std::vector<std::string>>> written;
  for (int j : targets) {
    const std::string label = "g" + std::to_string(j);
    const std::string path = targets.size() > 1 ? suffixed(m.out, "_" + label) : m.out;
    json r;
    double h = 0.0;
    if (m.bandwidth) {
      h = *m.bandwidth;
      r["bandwidth_source"] = "fixed";
    } else {
      auto sel = make<Bandwidth>([&](rdmc_bandwidth** o) {
        return rdmc_bandwidth_select(ds.get(), j, &est, fits.propensity.get(), fits.outcome[j].get(),
                                     nullptr, m.h_points, m.refine ? 1 : 0, o);
      });
      h = rdmc_bandwidth_h(sel.get());
      r["bandwidth_source"] = "lscv";
      r["lscv_score"] = rdmc_bandwidth_score(sel.get());
      r["refined"] = rdmc_bandwidth_refined(sel.get()) == 1;
    }
    r["h"] = h;
    auto curve = make<Curve>([&](rdmc_curve** o) {
      return rdmc_curve_estimate(ds.get(), j, &est, h, fits.propensity.get(), fits.outcome[j].get(),
                                 nullptr, m.grid_points, o);
    });
    if (m.variance) {
      check(rdmc_curve_attach_variance(curve.get(), ds.get(), fits.propensity.get(),
                                       fits.outcome[j].get(), density.get()));
    }
    r["failures"] = failures_of(curve.get());

    const std::size_t n = rdmc_curve_size(curve.get());
    const double* x = rdmc_curve_grid(curve.get());
    const double* g = rdmc_curve_values(curve.get());
    const double* s = rdmc_curve_slopes(curve.get());
    const double* v = rdmc_curve_variance(curve.get());
    std::vector<std::string> cols{"x", "ghat", "slope"};
    if (v) cols.emplace_back("variance");
    std::vector<std::vector<std::string>> rows;
    std::size_t present = 0;
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<std::string> row{num(x[k]), num(g[k]), num(s[k])};
      if (v) row.push_back(num(v[k]));
      rows.push_back(std::move(row));
      if (!std::isnan(g[k])) ++present;
    }
    write_table(path,
                {header_line(m),
                 "curve target=" + label + " method=" + m.method + " kernel=" + m.kernel +
                     " h=" + num(h) + " c0=" + num(m.c0) + " c1=" + num(m.c1),
                 "units: x running variable; ghat outcome units; slope outcome units per unit x; "
                 "variance squared outcome units"},
                cols, rows);
    results[label] = r;
    out << label << ": h=" << num(h) << " points=" << present << "/" << n << " -> " << path
        << '\n';
    if (present == 0) {
      err << "error: no grid point of " << label << " could be estimated; see "
          << sidecar_path(path) << '\n';
      status = kExitFailure;
    } else if (present < n) {
      err << "warning: " << (n - present) << " grid points of " << label
          << " have no estimate; diagnostics in " << sidecar_path(path) << '\n';
    }
    written.emplace_back(path, std::vector<std::string>{});
  }
  for (const auto& [path, unused] : written) write_sidecar(path, m, results);
  return status;
}

int cmd_bandwidth(const RunManifest& m, std::ostream& out) {
  auto ds = load_data(m);
  const int j = m.target == "1" ? 1 : 0;
  json results = json::object();
  NuisanceFits fits;
  fit_nuisances(m, ds.get(), {j}, fits, results);
  const auto est = estimator_of(m);
  auto sel = make<Bandwidth>([&](rdmc_bandwidth** o) {
    return rdmc_bandwidth_select(ds.get(), j, &est, fits.propensity.get(), fits.outcome[j].get(),
                                 m.h_grid.empty() ? nullptr : m.h_grid.data(),
                                 m.h_grid.empty() ? m.h_points : m.h_grid.size(),
                                 m.refine ? 1 : 0, o);
  });
  std::vector<std::vector<std::string>> rows;
  json profile = json::array();
  for (std::size_t i = 0; i < rdmc_bandwidth_profile_size(sel.get()); ++i) {
    double h = 0.0, score = 0.0;
    std::size_t excluded = 0;
    const char* diag = nullptr;
    check(rdmc_bandwidth_profile(sel.get(), i, &h, &score, &excluded, &diag));
    rows.push_back({num(h), num(score), std::to_string(excluded)});
    if (diag && *diag) profile.push_back({{"h", h}, {"diagnostic", diag}});
  }
  const double h = rdmc_bandwidth_h(sel.get());
  const double score = rdmc_bandwidth_score(sel.get());
  write_table(m.out,
              {header_line(m),
               "bandwidth target=g" + std::to_string(j) + " method=" + m.method +
                   " selected=" + num(h) + " score=" + num(score) +
                   " refined=" + (rdmc_bandwidth_refined(sel.get()) ? "1" : "0"),
               "units: h running-variable units; score squared outcome units; n_excluded units"},
              {"h", "score", "n_excluded"}, rows);
  results["selected_h"] = h;
  results["score"] = score;
  results["infeasible"] = profile;
  write_sidecar(m.out, m, results);
  out << "selected h=" << num(h) << " score=" << num(score) << " -> " << m.out << '\n';
  return kExitOk;
}

Curve curve_from_table(const CurveTable& t) {
  return make<Curve>([&](rdmc_curve** o) {
    return rdmc_curve_from_arrays(t.target, method_of(t.method), kernel_of(t.kernel), t.h, t.c0,
                                  t.c1, t.x.data(), t.ghat.data(), t.slope.data(),
                                  t.variance ? t.variance->data() : nullptr, t.x.size(), o);
  });
}

struct CurvePair {
  CurveTable t0, t1;
  Curve g0, g1;
};

CurvePair load_curves(const RunManifest& m) {
  CurvePair p;
  p.t0 = read_curve_table(m.g0_path);
  p.t1 = read_curve_table(m.g1_path);
  if (p.t0.target != 0) throw InputError(m.g0_path + " holds a g1 curve; --g0 expects g0");
  if (p.t1.target != 1) throw InputError(m.g1_path + " holds a g0 curve; --g1 expects g1");
  p.g0 = curve_from_table(p.t0);
  p.g1 = curve_from_table(p.t1);
  return p;
}

int cmd_effect(const RunManifest& m, std::ostream& out, std::ostream& err) {
  auto pair = load_curves(m);
  const double c0 = pair.t0.c0, c1 = pair.t0.c1;
  auto r0 = make<Curve>([&](rdmc_curve** o) { return rdmc_curve_restrict(pair.g0.get(), c0, c1, o); });
  auto r1 = make<Curve>([&](rdmc_curve** o) { return rdmc_curve_restrict(pair.g1.get(), c0, c1, o); });
  const bool band = pair.t0.variance && pair.t1.variance;
  if (!band) err << "note: curves carry no variance; se, lo and hi are nan\n";
  auto eff = make<Effect>([&](rdmc_effect** o) {
    return rdmc_effect_estimate(r0.get(), r1.get(), band ? m.level : 0.0, o);
  });
  const std::size_t n = rdmc_effect_size(eff.get());
  const double* x = rdmc_effect_grid(eff.get());
  const double* tau = rdmc_effect_tau(eff.get());
  const double* var = rdmc_effect_variance(eff.get());
  const double* lo = rdmc_effect_lower(eff.get());
  const double* hi = rdmc_effect_upper(eff.get());
  const double nan = std::nan("");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < n; ++k) {
    rows.push_back({num(x[k]), num(tau[k]), num(var ? std::sqrt(var[k]) : nan),
                    num(lo ? lo[k] : nan), num(hi ? hi[k] : nan)});
  }
  write_table(m.out,
              {header_line(m),
               "effect c0=" + num(c0) + " c1=" + num(c1) + " level=" + num(m.level) +
                   " variance=sum_of_curve_variances",
               "units: x running variable; tau, se, lo, hi outcome units"},
              {"x", "tau", "se", "lo", "hi"}, rows);
  write_sidecar(m.out, m,
                {{"c0", c0}, {"c1", c1}, {"points", n}, {"band", band}, {"h_g0", pair.t0.h},
                 {"h_g1", pair.t1.h}});
  out << "effect on " << n << " points in (" << num(c0) << ", " << num(c1) << ") -> " << m.out
      << '\n';
  return kExitOk;
}

int cmd_threshold(const RunManifest& m, std::ostream& out) {
  auto pair = load_curves(m);
  Density density;
  json density_info;
  if (m.normal_density) {
    density = make<Density>([&](rdmc_density** o) {
      return rdmc_density_normal((*m.normal_density)[0], (*m.normal_density)[1], o);
    });
    density_info = {{"kind", "normal"}, {"mean", (*m.normal_density)[0]}, {"sd", (*m.normal_density)[1]}};
  } else {
    auto ds = load_data(m);
    density = data_density(ds.get());
    density_info = {{"kind", "kde"}, {"bandwidth", rdmc_density_bandwidth(density.get())}};
  }
  std::vector<double> tx, tmc;
  rdmc_cost cost{0, 0.0, nullptr, nullptr, 0};
  if (m.mc) {
    cost.value = *m.mc;
  } else {
    const Table t = read_table(m.mc_table);
    try {
      tx = t.numbers("x");
      tmc = t.numbers("mc");
    } catch (const InputError& e) {
      throw InputError(m.mc_table + ": " + e.what());
    }
    cost = {1, 0.0, tx.data(), tmc.data(), tx.size()};
  }
  auto res = make<Threshold>([&](rdmc_threshold** o) {
    return rdmc_threshold_optimize(pair.g0.get(), pair.g1.get(), density.get(), &cost,
                                   m.resolution, o);
  });
  const double c_opt = rdmc_threshold_c_opt(res.get());
  const double objective = rdmc_threshold_objective(res.get());
  const char* boundary = "interior";
  switch (rdmc_threshold_boundary(res.get())) {
    case RDMC_BOUNDARY_AT_C0: boundary = "at_c0"; break;
    case RDMC_BOUNDARY_AT_C1: boundary = "at_c1"; break;
    case RDMC_BOUNDARY_INTERIOR: break;
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < rdmc_threshold_profile_size(res.get()); ++i) {
    double c = 0.0, v = 0.0;
    check(rdmc_threshold_profile(res.get(), i, &c, &v));
    rows.push_back({num(c), num(v)});
  }
  write_table(m.out,
              {header_line(m),
               "threshold c_opt=" + num(c_opt) + " boundary=" + boundary +
                   " objective=" + num(objective),
               "units: c running variable; net_benefit outcome units per unit of population"},
              {"c", "net_benefit"}, rows);
  write_sidecar(m.out, m,
                {{"c_opt", c_opt}, {"boundary", boundary}, {"objective", objective},
                 {"density", density_info}});
  out << "c_opt=" << num(c_opt) << " boundary=" << boundary << " objective=" << num(objective)
      << " -> " << m.out << '\n';
  return kExitOk;
}

int cmd_bench(const RunManifest& m, std::ostream& out, std::ostream& err) {
  const auto config = sim_config(m);
  rdmc_bench_options options{kernel_of(m.kernel), m.grid_points, m.h_points,
                             m.bandwidth ? *m.bandwidth : 0.0};
  auto rep = make<Bench>([&](rdmc_bench** o) {
    return rdmc_bench_run(&config, m.reps, m.seed, m.cells.c_str(), &options, o);
  });
  std::vector<std::vector<std::string>> rows;
  json cells = json::array();
  for (std::size_t i = 0; i < rdmc_bench_cell_count(rep.get()); ++i) {
    const char* est = nullptr;
    const char* nuis = nullptr;
    int target = 0;
    double mise = 0.0, mean_h = 0.0;
    std::size_t reps = 0, failed = 0;
    check(rdmc_bench_cell(rep.get(), i, &est, &nuis, &target, &mise, &reps, &failed, &mean_h));
    rows.push_back({est, nuis, "g" + std::to_string(target), num(mise), std::to_string(reps),
                    std::to_string(failed), num(mean_h), std::to_string(m.seed)});
    cells.push_back({{"estimator", est}, {"nuisance", nuis}, {"target", target}, {"mise", mise},
                     {"failed", failed}});
    out << est << " " << nuis << " g" << target << " MISE=" << num(mise) << '\n';
  }
  const bool degraded = rdmc_bench_degraded(rep.get()) == 1;
  write_table(m.out,
              {header_line(m),
               "bench reps=" + std::to_string(m.reps) + " cells=" + m.cells +
                   " degraded=" + (degraded ? "1" : "0"),
               "units: mise squared outcome units weighted by the density of x over [c0, c1]; "
               "mean_h running-variable units"},
              {"estimator", "nuisance", "target", "mise", "replications", "failed", "mean_h",
               "seed"},
              rows);
  write_sidecar(m.out, m,
                {{"cells", cells}, {"degraded", degraded},
                 {"runtime_seconds", rdmc_bench_runtime(rep.get())}});
  if (degraded) err << "warning: some cells failed in more than 10% of replications\n";
  return kExitOk;
}

}  // namespace

std::string sidecar_path(const std::string& output) { return output + ".manifest.json"; }

Invocation parse_invocation(const std::vector<std::string>& args) {
  RunManifest m;
  m.tool_version = rdmc_version();

  CLI::App app{"Counterfactual curves and treatment effects between the thresholds of a "
               "two-group sharp regression discontinuity design",
               "rdmc"};
  app.require_subcommand(1);
  // "-h" would collide with the bandwidth option "--h".
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", std::string(rdmc_version()));
  app.add_option("--kernel", m.kernel, "Kernel family")
      ->check(CLI::IsMember(kKernels))
      ->capture_default_str();
  app.add_option("--grid", m.grid_points, "Number of evaluation points on [c0, c1]")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}))
      ->capture_default_str();
  app.add_option("--c0", m.c0, "Threshold of group 0")->capture_default_str();
  app.add_option("--c1", m.c1, "Threshold of group 1")->capture_default_str();
  app.add_option("--seed", m.seed, "Random seed")->capture_default_str();
  app.add_option("--out", m.out, "Output table");

  auto* simulate = app.add_subcommand("simulate", "Draw a dataset from the simulation design");
  auto* fit = app.add_subcommand("fit", "Estimate counterfactual curves");
  auto* bandwidth = app.add_subcommand("bandwidth", "Cross-validation bandwidth profile");
  auto* effect = app.add_subcommand("effect", "Treatment effect curve from two fitted curves");
  auto* threshold = app.add_subcommand("threshold", "Net-benefit optimal threshold");
  auto* bench = app.add_subcommand("bench", "Monte Carlo benchmark of the estimators");
  for (auto* sub : {simulate, fit, bandwidth, effect, threshold, bench}) sub->fallthrough();

  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--n", m.sim.n, "Sample size")->check(CLI::PositiveNumber);
    sub->add_option("--mu-x", m.sim.mu_x, "Mean of the running variable");
    sub->add_option("--sigma-x", m.sim.sigma_x, "Sd of the running variable")
        ->check(CLI::PositiveNumber);
    sub->add_option("--sigma-xi", m.sim.sigma_xi, "Sd of the covariate noise")
        ->check(CLI::PositiveNumber);
    sub->add_option("--sigma-eps", m.sim.sigma_eps, "Sd of the outcome noise")
        ->check(CLI::PositiveNumber);
    sub->add_option("--x-dist", m.sim.x_dist, "Running-variable distribution")
        ->check(CLI::IsMember({"normal", "lognormal"}));
  };
  add_sim(simulate);
  add_sim(bench);

  auto add_columns = [&](CLI::App* sub) {
    sub->add_option("--x-col", m.x_col, "Running-variable column");
    sub->add_option("--d-col", m.d_col, "Group column");
    sub->add_option("--y-col", m.y_col, "Outcome column");
    sub->add_option("--z-col", m.z_col, "Treatment column, cross-checked when given");
  };
  std::string covariates, propensity, outcome, normal_density, h_grid;
  auto add_estimation = [&](CLI::App* sub) {
    sub->add_option("--data", m.data, "Input dataset")->required();
    add_columns(sub);
    sub->add_option("--covariates", covariates, "Covariate columns, comma separated");
    sub->add_option("--method", m.method, "Estimator")->check(CLI::IsMember(kMethods));
    sub->add_option("--ipw-group", m.ipw_group, "Group used by the IPW estimator")
        ->check(CLI::IsMember({0, 1}));
    sub->add_option("--propensity-spec", propensity, "Group model terms, e.g. 1,x,w1,w2");
    sub->add_option("--outcome-spec", outcome, "Outcome model terms, e.g. 1,x,x^2,w1,w2");
    sub->add_option("--link", m.link, "Group model link")->check(CLI::IsMember({"logit", "probit"}));
    sub->add_option("--h-points", m.h_points, "Size of the default bandwidth grid")
        ->check(CLI::Range(std::size_t{1}, std::size_t{10000}));
    sub->add_flag("--refine", m.refine, "Golden-section refinement of the selected bandwidth");
  };
  add_estimation(fit);
  add_estimation(bandwidth);

  double h = 0.0;
  fit->add_option("--target", m.target, "Curve to estimate")
      ->check(CLI::IsMember({"0", "1", "both"}));
  auto* fit_h = fit->add_option("--h", h, "Fixed bandwidth; cross-validation when absent")
                    ->check(CLI::PositiveNumber);
  fit->add_flag("--variance", m.variance, "Attach the plug-in variance (dr only)");
  fit->add_option("--normal-density", normal_density,
                  "Known normal density MEAN,SD of x for the variance instead of a KDE");

  std::string bw_target = "0";
  bandwidth->add_option("--target", bw_target, "Curve")->check(CLI::IsMember({"0", "1"}));
  bandwidth->add_option("--h-grid", h_grid, "Explicit bandwidth grid, comma separated");

  effect->add_option("--g0", m.g0_path, "g0 curve table")->required();
  effect->add_option("--g1", m.g1_path, "g1 curve table")->required();
  effect->add_option("--level", m.level, "Pointwise confidence level")
      ->check(CLI::Range(0.0, 1.0));

  threshold->add_option("--g0", m.g0_path, "g0 curve table")->required();
  threshold->add_option("--g1", m.g1_path, "g1 curve table")->required();
  double mc = 0.0;
  auto* mc_opt = threshold->add_option("--mc", mc, "Constant marginal cost of treatment");
  auto* mc_table = threshold->add_option("--mc-table", m.mc_table, "Cost table with columns x,mc");
  mc_opt->excludes(mc_table);
  auto* th_data = threshold->add_option("--data", m.data, "Dataset whose x feeds a KDE");
  add_columns(threshold);
  auto* th_normal = threshold->add_option("--normal-density", normal_density,
                                          "Known normal density MEAN,SD of x");
  th_data->excludes(th_normal);
  threshold->add_option("--resolution", m.resolution, "Number of candidate thresholds")
      ->check(CLI::Range(std::size_t{2}, std::size_t{10000000}));

  bench->add_option("--reps", m.reps, "Replications")->check(CLI::PositiveNumber);
  bench->add_option("--cells", m.cells, "Cell set")->check(CLI::IsMember({"table1", "table2", "all"}));
  auto* bench_h = bench->add_option("--h", h, "Fixed bandwidth; cross-validation when absent")
                      ->check(CLI::PositiveNumber);
  bench->add_option("--h-points", m.h_points, "Size of the default bandwidth grid")
      ->check(CLI::Range(std::size_t{1}, std::size_t{10000}));

  Invocation result;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    auto* sub = app.get_subcommands().front();
    m.command = sub->get_name();
    if (m.out.empty()) throw UsageError("--out is required");
    if (!(m.c0 < m.c1)) throw UsageError("--c0 must be smaller than --c1");

    if (sub == fit || sub == bandwidth) {
      if (sub == bandwidth) {
        m.target = bw_target;
        if (!h_grid.empty()) {
          m.h_grid = parse_number_list(h_grid, "--h-grid");
          for (std::size_t k = 0; k < m.h_grid.size(); ++k) {
            if (!(m.h_grid[k] > 0.0) || (k > 0 && !(m.h_grid[k] > m.h_grid[k - 1]))) {
              throw UsageError("--h-grid must be positive and strictly increasing");
            }
          }
        }
      }
      if (m.method != "ipw" && m.ipw_group != -1) {
        throw UsageError("--ipw-group applies to --method ipw only");
      }
      if (!covariates.empty()) m.covariates = split_list(covariates);
      resolve_covariates(m);
      resolve_specs(m, propensity, outcome);
      if (sub == fit) {
        if (fit_h->count() > 0) m.bandwidth = h;
        if (m.variance && m.method != "dr") {
          throw UsageError("--variance is available for --method dr only");
        }
        if (!normal_density.empty() && !m.variance) {
          throw UsageError("--normal-density needs --variance");
        }
        m.normal_density = parse_normal_density(normal_density);
      }
    }
    if (sub == threshold) {
      if (mc_opt->count() > 0) m.mc = mc;
      if (!m.mc && m.mc_table.empty()) throw UsageError("threshold needs --mc or --mc-table");
      m.normal_density = parse_normal_density(normal_density);
      if (m.data.empty() && !m.normal_density) {
        throw UsageError("threshold needs --data (KDE of x) or --normal-density");
      }
      if (!m.data.empty() && !covariates.empty()) m.covariates = split_list(covariates);
    }
    if (sub == effect && !(m.level > 0.0 && m.level < 1.0)) {
      throw UsageError("--level must lie strictly between 0 and 1");
    }
    if (sub == bench && bench_h->count() > 0) m.bandwidth = h;
    result.manifest = m;
  } catch (const CLI::CallForHelp&) {
    result.message = app.help();
    result.exit_code = kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    result.message = app.help("", CLI::AppFormatMode::All);
    result.exit_code = kExitOk;
  } catch (const CLI::CallForVersion&) {
    result.message = std::string(rdmc_version()) + "\n";
    result.exit_code = kExitOk;
  } catch (const CLI::ParseError& e) {
    result.message = std::string("usage error: ") + e.what() + "\nRun with --help for usage.\n";
    result.exit_code = kExitUsage;
  } catch (const UsageError& e) {
    result.message = std::string("usage error: ") + e.what() + "\n";
    result.exit_code = kExitUsage;
  }
  return result;
}

int execute(const RunManifest& m, std::ostream& out, std::ostream& err) {
  try {
    if (m.command == "simulate") return cmd_simulate(m, out);
    if (m.command == "fit") return cmd_fit(m, out, err);
    if (m.command == "bandwidth") return cmd_bandwidth(m, out);
    if (m.command == "effect") return cmd_effect(m, out, err);
    if (m.command == "threshold") return cmd_threshold(m, out);
    if (m.command == "bench") return cmd_bench(m, out, err);
    throw UsageError("unknown command '" + m.command + "'");
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ApiError& e) {
    err << "error: " << e.what() << '\n';
    if (!m.out.empty()) {
      write_sidecar(m.out, m, nullptr,
                    {{"code", rdmc_status_name(e.status)}, {"message", e.what()}});
    }
    return kExitFailure;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    if (!m.out.empty()) write_sidecar(m.out, m, nullptr, {{"code", "input"}, {"message", e.what()}});
    return kExitFailure;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Invocation inv = parse_invocation(args);
  if (!inv.manifest) {
    (inv.exit_code == kExitOk ? out : err) << inv.message;
    return inv.exit_code;
  }
  return execute(*inv.manifest, out, err);
}

}  // namespace rdmc::cli
