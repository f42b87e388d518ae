// SPDX-License-Identifier: Apache-2.0
#include "rdmc/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rdmc/parallel.hpp"

namespace rdmc {

LscvScore lscv_score(const LocalLinearEstimator& estimator, const Dataset& dataset, double h) {
  const TargetOutcome target = estimator.target();
  std::vector<std::size_t> held_out;
  for (std::size_t i = 0; i < dataset.units.size(); ++i) {
    const auto& u = dataset.units[i];
    if (target.observed(u) && target.in_range(u.x, dataset.thresholds)) held_out.push_back(i);
  }
  if (held_out.size() < 2) {
    throw Error(ErrorCode::sample_size, "LSCV needs at least two observed outcomes in range");
  }

  constexpr double kFailed = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> sq(held_out.size(), kFailed);
  parallel_for(held_out.size(), [&](std::size_t k) {
    const std::size_t i = held_out[k];
    try {
      const double r = dataset.units[i].y - estimator.fit_at(dataset.units[i].x, h, i).alpha0;
      sq[k] = r * r;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::insufficient_support && e.code() != ErrorCode::conditioning) {
        throw;
      }
    }
  });

  LscvScore out;
  double sum = 0.0;
  for (double v : sq) {
    if (std::isnan(v)) {
      ++out.n_excluded;
    } else {
      sum += v;
      ++out.n_used;
    }
  }
  if (out.n_used == 0) {
    std::ostringstream os;
    os << "bandwidth h = " << h << " is infeasible: all " << held_out.size()
       << " leave-one-out fits lack support";
    throw Error(ErrorCode::bandwidth_infeasible, os.str());
  }
  out.score = sum / static_cast<double>(out.n_used);
  return out;
}

LscvScore lscv_score(const Dataset& dataset, TargetOutcome target, const EstimatorMethod& method,
                     double h, const PropensityFit* pfit, const OutcomeFit* ofit,
                     KernelSpec kernel) {
  const auto est = LocalLinearEstimator::build(dataset, target, method, pfit, ofit, kernel);
  return lscv_score(est, dataset, h);
}

BandwidthSearch BandwidthSearch::default_for(const Dataset& dataset, TargetOutcome target,
                                             std::size_t points) {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (const auto& u : dataset.units) {
    if (!target.in_range(u.x, dataset.thresholds)) continue;
    sum += u.x;
    ++n;
  }
  if (n < 2 || points == 0) {
    throw Error(ErrorCode::sample_size, "default bandwidth grid needs two in-range units");
  }
  const double mean = sum / static_cast<double>(n);
  for (const auto& u : dataset.units) {
    if (target.in_range(u.x, dataset.thresholds)) sum_sq += (u.x - mean) * (u.x - mean);
  }
  const double sd = std::sqrt(sum_sq / static_cast<double>(n - 1));
  if (!(sd > 0.0)) {
    throw Error(ErrorCode::degenerate_sample, "in-range x has zero spread");
  }
  BandwidthSearch search;
  const double lo = std::log(0.1 * sd);
  const double hi = std::log(2.0 * sd);
  for (std::size_t k = 0; k < points; ++k) {
    const double t = points == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(points - 1);
    search.h_grid.push_back(std::exp(lo + t * (hi - lo)));
  }
  return search;
}

namespace {

struct Evaluated {
  double h;
  double score;  // +inf when infeasible
};

// Lower score wins; equal scores prefer the larger bandwidth.
bool better(const Evaluated& a, const Evaluated& b) {
  return a.score < b.score || (a.score == b.score && a.h > b.h);
}

}  // namespace

BandwidthSelection select_bandwidth(const Dataset& dataset, TargetOutcome target,
                                    const EstimatorMethod& method, const BandwidthSearch& search,
                                    const PropensityFit* pfit, const OutcomeFit* ofit,
                                    KernelSpec kernel) {
  const auto& grid = search.h_grid;
  if (grid.empty()) {
    throw Error(ErrorCode::configuration, "bandwidth search grid is empty");
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || (k > 0 && !(grid[k] > grid[k - 1]))) {
      throw Error(ErrorCode::configuration,
                  "bandwidth grid must be positive and strictly increasing");
    }
  }
  const auto est = LocalLinearEstimator::build(dataset, target, method, pfit, ofit, kernel);

  BandwidthSelection sel;
  sel.profile.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    auto& entry = sel.profile[k];
    entry.h = grid[k];
    try {
      const auto s = lscv_score(est, dataset, grid[k]);
      entry.score = s.score;
      entry.n_excluded = s.n_excluded;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::bandwidth_infeasible) throw;
      entry.diagnostic = e.what();
    }
  });

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> best_index;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!sel.profile[k].score) continue;
    if (!best_index ||
        better({grid[k], *sel.profile[k].score},
               {grid[*best_index], *sel.profile[*best_index].score})) {
      best_index = k;
    }
  }
  if (!best_index) {
    std::ostringstream os;
    os << "no feasible bandwidth in the search grid:";
    for (const auto& e : sel.profile) os << "\n  h = " << e.h << ": " << e.diagnostic;
    throw Error(ErrorCode::selection, os.str());
  }

  Evaluated best{grid[*best_index], *sel.profile[*best_index].score};
  if (search.refine && grid.size() > 1) {
    const std::size_t k = *best_index;
    double a = grid[k == 0 ? 0 : k - 1];
    double b = grid[k + 1 < grid.size() ? k + 1 : k];
    const double tol = 1e-3 * best.h;
    auto eval = [&](double h) {
      try {
        return lscv_score(est, dataset, h).score;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::bandwidth_infeasible) throw;
        return inf;
      }
    };
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = eval(c), fd = eval(d);
    while (b - a > tol) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - ratio * (b - a);
        fc = eval(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + ratio * (b - a);
        fd = eval(d);
      }
    }
    for (const Evaluated cand : {Evaluated{c, fc}, Evaluated{d, fd}}) {
      if (std::isfinite(cand.score) && better(cand, best)) {
        best = cand;
        sel.refined = true;
      }
    }
  }
  sel.h = best.h;
  sel.score = best.score;
  return sel;
}

}  // namespace rdmc
