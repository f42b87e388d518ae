// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rdmc/dataset.hpp"

namespace rdmc {

struct FeatureTerm {
  enum class Kind { intercept, x, x_squared, covariate };

  Kind kind = Kind::intercept;
  std::size_t index = 0;  ///< 0-based covariate index, only for Kind::covariate

  static FeatureTerm intercept() { return {Kind::intercept, 0}; }
  static FeatureTerm linear() { return {Kind::x, 0}; }
  static FeatureTerm squared() { return {Kind::x_squared, 0}; }
  static FeatureTerm covariate(std::size_t k) { return {Kind::covariate, k}; }

  /// "1", "x", "x^2", "w1", "w2", ... (covariates are 1-based in labels).
  std::string label() const;
  double evaluate(double x, std::span<const double> w) const;

  bool operator==(const FeatureTerm&) const = default;
};

/// Ordered list of regressors for a parametric nuisance model.
class FeatureSpec {
 public:
  FeatureSpec() = default;
  explicit FeatureSpec(std::vector<FeatureTerm> terms);

  /// Parses labels such as {"1","x","x^2","w1","w2"}.
  static FeatureSpec parse(const std::vector<std::string>& labels);
  /// Comma separated form of `parse`, e.g. "1,x,x^2,w1,w2".
  static FeatureSpec parse_list(std::string_view list);

  /// {1, x, w1..wm}: the logit index of the simulation design.
  static FeatureSpec propensity_default(std::size_t covariates);
  /// {1, x, x^2, w1..wm}: the outcome mean of the simulation design.
  static FeatureSpec outcome_default(std::size_t covariates);

  const std::vector<FeatureTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  std::vector<std::string> labels() const;
  std::string joined() const;

  /// Copy with `term` removed; throws if it is absent.
  FeatureSpec without(const FeatureTerm& term) const;
  /// Number of covariates a unit needs for this spec to be evaluable.
  std::size_t covariates_required() const;

  void fill_row(double x, std::span<const double> w,
                Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const;

  bool operator==(const FeatureSpec&) const = default;

 private:
  std::vector<FeatureTerm> terms_;
};

enum class Link { logit, probit };

struct PropensityOptions {
  Link link = Link::logit;
  int max_iterations = 100;
  int max_halvings = 30;
  double step_tolerance = 1e-10;
  /// When set, fit only on the units of that pipeline's estimation range
  /// (x < c1 for g0, x > c0 for g1). Unset fits once on all units.
  std::optional<TargetOutcome> pipeline;
};

/// Pr(D = 1 | X, W) under a binary-response GLM.
struct PropensityFit {
  Eigen::VectorXd gamma;
  FeatureSpec spec;
  Link link = Link::logit;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  double score_norm = 0.0;  ///< infinity norm of the score at gamma
  std::size_t n_used = 0;
  std::size_t covariate_count = 0;
};

struct OutcomeFit {
  Eigen::VectorXd eta;
  FeatureSpec spec;
  TargetOutcome target;
  std::size_t n_used = 0;
  std::size_t covariate_count = 0;
};

inline constexpr double kPropensityFloor = 1e-6;

PropensityFit fit_propensity(const Dataset& dataset, const FeatureSpec& spec,
                             const PropensityOptions& options = {});

/// Fitted probability, clipped to [1e-6, 1 - 1e-6].
double predict_propensity(const PropensityFit& fit, double x, std::span<const double> w);

/// A fit that returns `gamma` verbatim; for known or fixed selection probabilities.
PropensityFit make_propensity(const FeatureSpec& spec, Eigen::VectorXd gamma,
                              std::size_t covariate_count, Link link = Link::logit);

/// OLS of y on `spec` over all units whose realized outcome is Y_j.
OutcomeFit fit_outcome(const Dataset& dataset, TargetOutcome target, const FeatureSpec& spec);

double predict_outcome(const OutcomeFit& fit, double x, std::span<const double> w);

OutcomeFit make_outcome(const FeatureSpec& spec, Eigen::VectorXd eta, TargetOutcome target,
                        std::size_t covariate_count);

std::string to_string(Link link);

}  // namespace rdmc
