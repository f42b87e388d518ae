// SPDX-License-Identifier: Apache-2.0
#include "rdmc/simulation.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "rdmc/bandwidth.hpp"
#include "rdmc/parallel.hpp"
#include "rdmc/quadrature.hpp"

namespace rdmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double expit(double v) { return 1.0 / (1.0 + std::exp(-v)); }

struct LogNormalParams {
  double m = 0.0;
  double s = 1.0;
};

LogNormalParams lognormal_params(double mean, double sd) {
  const double s2 = std::log1p((sd * sd) / (mean * mean));
  return {std::log(mean) - 0.5 * s2, std::sqrt(s2)};
}

}  // namespace

std::string to_string(XDistribution dist) {
  return dist == XDistribution::lognormal ? "lognormal" : "normal";
}

std::optional<XDistribution> parse_x_distribution(std::string_view name) {
  if (name == "normal") return XDistribution::normal;
  if (name == "lognormal") return XDistribution::lognormal;
  return std::nullopt;
}

void SimConfig::check() const {
  if (!(c0 < c1)) throw Error(ErrorCode::configuration, "simulation needs c0 < c1");
  if (!(sigma_x > 0.0 && sigma_xi > 0.0 && sigma_eps > 0.0)) {
    throw Error(ErrorCode::configuration, "simulation scales must be positive");
  }
  if (x_dist == XDistribution::lognormal && !(mu_x > 0.0)) {
    throw Error(ErrorCode::configuration, "log-normal running variable needs a positive mean");
  }
  if (n == 0) throw Error(ErrorCode::configuration, "simulation needs n >= 1");
}

double SimConfig::x_density(double x) const {
  if (x_dist == XDistribution::normal) return NormalDensity{mu_x, sigma_x}(x);
  if (!(x > 0.0)) return 0.0;
  const auto p = lognormal_params(mu_x, sigma_x);
  return NormalDensity{p.m, p.s}(std::log(x)) / x;
}

double SimConfig::group_probability(double x, double w1, double w2) const {
  return expit(gamma[0] + gamma[1] * x + gamma[2] * w1 + gamma[3] * w2);
}

Dataset generate(const SimConfig& config, std::uint64_t seed) {
  config.check();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x52444d43u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const auto ln = lognormal_params(config.mu_x, config.sigma_x);

  Dataset ds;
  ds.thresholds = config.thresholds();
  ds.covariate_names = {"w1", "w2"};
  ds.units.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    UnitRecord u;
    const double e = std_normal(rng);
    u.x = config.x_dist == XDistribution::normal ? config.mu_x + config.sigma_x * e
                                                 : std::exp(ln.m + ln.s * e);
    const double w1 = config.eta0[0] + config.eta1[0] * u.x + config.sigma_xi * std_normal(rng);
    const double w2 = config.eta0[1] + config.eta1[1] * u.x + config.sigma_xi * std_normal(rng);
    u.w = {w1, w2};
    u.d = uniform(rng) < config.group_probability(u.x, w1, w2) ? 1 : 0;
    u.z = assigned_treatment(u.x, u.d, ds.thresholds);
    const auto& b = u.z == 1 ? config.beta1 : config.beta0;
    u.y = b[0] + b[1] * u.x + b[2] * u.x * u.x + b[3] * w1 + b[4] * w2 +
          config.sigma_eps * std_normal(rng);
    ds.units.push_back(std::move(u));
  }
  return ds;
}

TrueCurve true_curve(const SimConfig& config, TargetOutcome target) {
  const auto& b = target.j() == 1 ? config.beta1 : config.beta0;
  return {b[0] + b[3] * config.eta0[0] + b[4] * config.eta0[1],
          b[1] + b[3] * config.eta1[0] + b[4] * config.eta1[1], b[2]};
}

IseResult integrated_squared_error(const Curve& curve, const std::function<double(double)>& truth,
                                   const DensityFn& density, double lo, double hi) {
  if (curve.grid.empty() || curve.grid.front() > lo || curve.grid.back() < hi || hi < lo) {
    throw Error(ErrorCode::domain, "curve grid does not cover the integration range");
  }
  // Grid points bracketing [lo, hi].
  const auto first = static_cast<std::size_t>(
      std::upper_bound(curve.grid.begin(), curve.grid.end(), lo) - curve.grid.begin() - 1);
  const auto last = static_cast<std::size_t>(
      std::lower_bound(curve.grid.begin(), curve.grid.end(), hi) - curve.grid.begin());
  const std::size_t count = last - first + 1;

  std::vector<std::size_t> present;
  for (std::size_t k = first; k <= last; ++k) {
    if (curve.has_value(k)) present.push_back(k);
  }
  IseResult result;
  result.interpolated = count - present.size();
  if (present.empty() ||
      static_cast<double>(result.interpolated) > kMaxMissingFraction * static_cast<double>(count)) {
    std::ostringstream os;
    os << result.interpolated << " of " << count
       << " grid points have no estimate; integrated squared error is unreliable";
    throw Error(ErrorCode::unreliable_ise, os.str());
  }

  std::vector<double> xs(curve.grid.begin() + static_cast<std::ptrdiff_t>(first),
                         curve.grid.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  std::vector<double> integrand(count);
  std::size_t next = 0;  // first present index >= k
  for (std::size_t k = first; k <= last; ++k) {
    while (next < present.size() && present[next] < k) ++next;
    double g;
    if (curve.has_value(k)) {
      g = curve.values[k];
    } else if (next == 0) {
      g = curve.values[present.front()];
    } else if (next == present.size()) {
      g = curve.values[present.back()];
    } else {
      const std::size_t a = present[next - 1], b = present[next];
      const double t = (curve.grid[k] - curve.grid[a]) / (curve.grid[b] - curve.grid[a]);
      g = curve.values[a] + t * (curve.values[b] - curve.values[a]);
    }
    const double diff = g - truth(curve.grid[k]);
    integrand[k - first] = diff * diff * density(curve.grid[k]);
  }
  result.ise = integrate_piecewise_linear(xs, integrand, lo, hi);
  return result;
}

std::string BenchmarkCell::estimator_label() const { return method.label(); }

std::string BenchmarkCell::nuisance_label() const {
  switch (method.kind) {
    case EstimatorMethod::Kind::naive: return "-";
    case EstimatorMethod::Kind::ipw: return propensity_wrong ? "pi_wrong" : "pi_correct";
    case EstimatorMethod::Kind::dr:
      if (propensity_wrong && outcome_wrong) return "both_wrong";
      if (propensity_wrong) return "pi_wrong";
      if (outcome_wrong) return "delta_wrong";
      return "both_correct";
  }
  return "-";
}

std::vector<BenchmarkCell> table1_cells() {
  std::vector<BenchmarkCell> cells;
  for (int j : {0, 1}) {
    cells.push_back({EstimatorMethod::naive(), TargetOutcome(j), false, false});
    cells.push_back({EstimatorMethod::ipw(), TargetOutcome(j), false, false});
    cells.push_back({EstimatorMethod::dr(), TargetOutcome(j), false, false});
  }
  return cells;
}

std::vector<BenchmarkCell> table2_cells() {
  const TargetOutcome g0(0);
  return {{EstimatorMethod::ipw(), g0, true, false},
          {EstimatorMethod::dr(), g0, true, false},
          {EstimatorMethod::dr(), g0, false, true},
          {EstimatorMethod::dr(), g0, true, true}};
}

std::vector<BenchmarkCell> benchmark_cells(std::string_view which) {
  if (which == "table1") return table1_cells();
  if (which == "table2") return table2_cells();
  if (which == "all") {
    auto cells = table1_cells();
    for (auto& c : table2_cells()) cells.push_back(c);
    return cells;
  }
  throw Error(ErrorCode::configuration,
              "unknown benchmark cell set '" + std::string(which) + "' (table1, table2, all)");
}

namespace {

struct CellOutcome {
  double ise = kNaN;
  double h = kNaN;
  std::string failure;
};

// Nuisance fits shared by the cells of one replication.
class ReplicationFits {
 public:
  explicit ReplicationFits(const Dataset& ds) : ds_(ds) {}

  const PropensityFit& propensity(bool wrong) {
    auto& slot = propensity_[wrong ? 1 : 0];
    if (!slot) {
      auto spec = FeatureSpec::propensity_default(ds_.covariate_count());
      if (wrong) spec = spec.without(FeatureTerm::covariate(0));
      slot = fit_propensity(ds_, spec);
    }
    return *slot;
  }

  const OutcomeFit& outcome(TargetOutcome target, bool wrong) {
    auto& slot = outcome_[target.j()][wrong ? 1 : 0];
    if (!slot) {
      auto spec = FeatureSpec::outcome_default(ds_.covariate_count());
      if (wrong) spec = spec.without(FeatureTerm::squared());
      slot = fit_outcome(ds_, target, spec);
    }
    return *slot;
  }

 private:
  const Dataset& ds_;
  std::optional<PropensityFit> propensity_[2];
  std::optional<OutcomeFit> outcome_[2][2];
};

CellOutcome run_cell(const SimConfig& config, const Dataset& ds, ReplicationFits& fits,
                     const BenchmarkCell& cell, const BenchmarkOptions& options,
                     const std::vector<double>& grid) {
  CellOutcome out;
  try {
    const PropensityFit* pfit = nullptr;
    const OutcomeFit* ofit = nullptr;
    if (cell.method.kind != EstimatorMethod::Kind::naive) {
      pfit = &fits.propensity(cell.propensity_wrong);
    }
    if (cell.method.kind == EstimatorMethod::Kind::dr) {
      ofit = &fits.outcome(cell.target, cell.outcome_wrong);
    }
    if (options.fixed_h) {
      out.h = *options.fixed_h;
    } else {
      const auto search = BandwidthSearch::default_for(ds, cell.target, options.bandwidth_points);
      out.h = select_bandwidth(ds, cell.target, cell.method, search, pfit, ofit, options.kernel).h;
    }
    const Curve curve =
        estimate_curve(ds, cell.target, cell.method, out.h, pfit, ofit, grid, options.kernel);
    const TrueCurve truth = true_curve(config, cell.target);
    out.ise = integrated_squared_error(
                  curve, truth, [&](double x) { return config.x_density(x); }, config.c0,
                  config.c1)
                  .ise;
  } catch (const Error& e) {
    out.ise = kNaN;
    out.failure = std::string(to_string(e.code())) + ": " + e.what();
  }
  return out;
}

}  // namespace

BenchmarkReport run_benchmark(const SimConfig& config, std::size_t replications,
                              std::uint64_t base_seed, const std::vector<BenchmarkCell>& cells,
                              const BenchmarkOptions& options) {
  config.check();
  if (replications == 0) {
    throw Error(ErrorCode::configuration, "benchmark needs at least one replication");
  }
  if (cells.empty()) throw Error(ErrorCode::configuration, "benchmark has no cells");
  const auto start = std::chrono::steady_clock::now();
  const auto grid = default_grid(config.thresholds(), options.grid_points);

  std::vector<std::vector<CellOutcome>> outcomes(replications);
  parallel_for(replications, [&](std::size_t r) {
    const Dataset ds = generate(config, base_seed + r);
    ReplicationFits fits(ds);
    auto& row = outcomes[r];
    row.reserve(cells.size());
    for (const auto& cell : cells) row.push_back(run_cell(config, ds, fits, cell, options, grid));
  });

  BenchmarkReport report;
  report.config = config;
  report.replications = replications;
  report.base_seed = base_seed;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellRecord rec;
    rec.cell = cells[c];
    rec.replications = replications;
    double ise_sum = 0.0, h_sum = 0.0;
    std::size_t ok = 0;
    for (std::size_t r = 0; r < replications; ++r) {
      const auto& o = outcomes[r][c];
      rec.ise.push_back(o.ise);
      rec.h.push_back(o.h);
      if (std::isnan(o.ise)) {
        ++rec.failed;
        rec.failures.push_back("replication " + std::to_string(r) + ": " + o.failure);
        continue;
      }
      ise_sum += o.ise;
      h_sum += o.h;
      ++ok;
    }
    rec.mise = ok ? ise_sum / static_cast<double>(ok) : kNaN;
    rec.mean_h = ok ? h_sum / static_cast<double>(ok) : kNaN;
    if (static_cast<double>(rec.failed) > 0.1 * static_cast<double>(replications)) {
      report.degraded = true;
    }
    report.cells.push_back(std::move(rec));
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace rdmc
