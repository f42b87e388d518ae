// SPDX-License-Identifier: Apache-2.0
#include "rdmc/nuisance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rdmc/error.hpp"

namespace rdmc {

std::string FeatureTerm::label() const {
  switch (kind) {
    case Kind::intercept: return "1";
    case Kind::x: return "x";
    case Kind::x_squared: return "x^2";
    case Kind::covariate: return "w" + std::to_string(index + 1);
  }
  return "?";
}

double FeatureTerm::evaluate(double x, std::span<const double> w) const {
  switch (kind) {
    case Kind::intercept: return 1.0;
    case Kind::x: return x;
    case Kind::x_squared: return x * x;
    case Kind::covariate: return w[index];
  }
  return 0.0;
}

FeatureSpec::FeatureSpec(std::vector<FeatureTerm> terms) : terms_(std::move(terms)) {
  for (std::size_t a = 0; a < terms_.size(); ++a) {
    for (std::size_t b = a + 1; b < terms_.size(); ++b) {
      if (terms_[a] == terms_[b]) {
        throw Error(ErrorCode::configuration, "duplicate feature term '" + terms_[a].label() + "'");
      }
    }
  }
}

FeatureSpec FeatureSpec::parse(const std::vector<std::string>& labels) {
  std::vector<FeatureTerm> terms;
  for (const auto& raw : labels) {
    std::string_view s = raw;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (s == "1") {
      terms.push_back(FeatureTerm::intercept());
    } else if (s == "x") {
      terms.push_back(FeatureTerm::linear());
    } else if (s == "x^2" || s == "x2") {
      terms.push_back(FeatureTerm::squared());
    } else if (s.size() > 1 && s.front() == 'w') {
      std::size_t k = 0;
      auto [ptr, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), k);
      if (ec != std::errc() || ptr != s.data() + s.size() || k == 0) {
        throw Error(ErrorCode::configuration, "bad covariate term '" + std::string(s) + "'");
      }
      terms.push_back(FeatureTerm::covariate(k - 1));
    } else {
      throw Error(ErrorCode::configuration, "unknown feature term '" + std::string(s) + "'");
    }
  }
  return FeatureSpec(std::move(terms));
}

FeatureSpec FeatureSpec::parse_list(std::string_view list) {
  std::vector<std::string> labels;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto pos = list.find(',', start);
    if (pos == std::string_view::npos) pos = list.size();
    labels.emplace_back(list.substr(start, pos - start));
    start = pos + 1;
  }
  return parse(labels);
}

FeatureSpec FeatureSpec::propensity_default(std::size_t covariates) {
  std::vector<FeatureTerm> t{FeatureTerm::intercept(), FeatureTerm::linear()};
  for (std::size_t k = 0; k < covariates; ++k) t.push_back(FeatureTerm::covariate(k));
  return FeatureSpec(std::move(t));
}

FeatureSpec FeatureSpec::outcome_default(std::size_t covariates) {
  std::vector<FeatureTerm> t{FeatureTerm::intercept(), FeatureTerm::linear(),
                             FeatureTerm::squared()};
  for (std::size_t k = 0; k < covariates; ++k) t.push_back(FeatureTerm::covariate(k));
  return FeatureSpec(std::move(t));
}

std::vector<std::string> FeatureSpec::labels() const {
  std::vector<std::string> out;
  for (const auto& t : terms_) out.push_back(t.label());
  return out;
}

std::string FeatureSpec::joined() const {
  std::string out;
  for (const auto& t : terms_) {
    if (!out.empty()) out += ',';
    out += t.label();
  }
  return out;
}

FeatureSpec FeatureSpec::without(const FeatureTerm& term) const {
  auto copy = terms_;
  auto it = std::find(copy.begin(), copy.end(), term);
  if (it == copy.end()) {
    throw Error(ErrorCode::configuration, "term '" + term.label() + "' not in spec " + joined());
  }
  copy.erase(it);
  return FeatureSpec(std::move(copy));
}

std::size_t FeatureSpec::covariates_required() const {
  std::size_t need = 0;
  for (const auto& t : terms_) {
    if (t.kind == FeatureTerm::Kind::covariate) need = std::max(need, t.index + 1);
  }
  return need;
}

void FeatureSpec::fill_row(double x, std::span<const double> w,
                           Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const {
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    row(static_cast<Eigen::Index>(k)) = terms_[k].evaluate(x, w);
  }
}

std::string to_string(Link link) { return link == Link::logit ? "logit" : "probit"; }

namespace {

void check_spec_against(const FeatureSpec& spec, std::size_t covariates) {
  if (spec.size() == 0) {
    throw Error(ErrorCode::configuration, "feature spec is empty");
  }
  if (spec.covariates_required() > covariates) {
    throw Error(ErrorCode::configuration,
                "feature spec " + spec.joined() + " references covariate w" +
                    std::to_string(spec.covariates_required()) + " but the dataset has " +
                    std::to_string(covariates));
  }
}

Eigen::MatrixXd design_matrix(const std::vector<const UnitRecord*>& units,
                              const FeatureSpec& spec) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(units.size()),
                    static_cast<Eigen::Index>(spec.size()));
  for (std::size_t i = 0; i < units.size(); ++i) {
    spec.fill_row(units[i]->x, units[i]->w, X.row(static_cast<Eigen::Index>(i)));
  }
  return X;
}

void require_full_rank(const Eigen::MatrixXd& X, const FeatureSpec& spec, const char* what) {
  // Column equilibration keeps the rank decision independent of regressor scale.
  Eigen::VectorXd norms = X.colwise().norm().transpose();
  Eigen::MatrixXd scaled = X;
  for (Eigen::Index k = 0; k < X.cols(); ++k) {
    if (norms(k) > 0.0) scaled.col(k) /= norms(k);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    throw Error(ErrorCode::rank, std::string(what) + " design with terms " + spec.joined() +
                                     " is rank deficient (rank " + std::to_string(qr.rank()) +
                                     " of " + std::to_string(X.cols()) + ")");
  }
}

struct LinkEval {
  double mu;      // P(D=1)
  double loglik;  // contribution
  double resid;   // d loglik / d eta
  double info;    // expected information in eta
};

double log_sigmoid(double t) {
  return t >= 0.0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t));
}

double normal_cdf(double t) { return 0.5 * std::erfc(-t * std::numbers::sqrt2 / 2.0); }

double log_normal_cdf(double t) {
  if (t > -30.0) return std::log(normal_cdf(t));
  // Mills-ratio asymptotic; erfc underflows far in the tail.
  return -0.5 * t * t - std::log(-t) - 0.5 * std::log(2.0 * std::numbers::pi);
}

LinkEval evaluate_link(Link link, double eta, int y) {
  if (link == Link::logit) {
    const double mu = eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta))
                                 : std::exp(eta) / (1.0 + std::exp(eta));
    const double q = eta >= 0.0 ? std::exp(-eta) / (1.0 + std::exp(-eta))
                                : 1.0 / (1.0 + std::exp(eta));
    const double ll = y == 1 ? log_sigmoid(eta) : log_sigmoid(-eta);
    return {mu, ll, y == 1 ? q : -mu, mu * q};
  }
  // Ratios of the normal density to its tail probabilities in log space, so
  // neither 1 - Phi nor Phi cancels far from zero.
  const double log_pdf = -0.5 * eta * eta - 0.5 * std::log(2.0 * std::numbers::pi);
  const double log_p = log_normal_cdf(eta);
  const double log_q = log_normal_cdf(-eta);
  const double resid = y == 1 ? std::exp(log_pdf - log_p) : -std::exp(log_pdf - log_q);
  return {normal_cdf(eta), y == 1 ? log_p : log_q, resid, std::exp(2.0 * log_pdf - log_p - log_q)};
}

double log_likelihood(Link link, const Eigen::VectorXd& eta, const std::vector<int>& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += evaluate_link(link, eta(i), y[static_cast<std::size_t>(i)]).loglik;
  }
  return ll;
}

// Score and expected information. For the logit link these equal the Newton
// gradient and negative Hessian.
void score_and_information(Link link, const Eigen::MatrixXd& X, const Eigen::VectorXd& eta,
                           const std::vector<int>& y, Eigen::VectorXd& score,
                           Eigen::MatrixXd& info) {
  const Eigen::Index n = X.rows();
  Eigen::VectorXd resid_weight(n), info_weight(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto e = evaluate_link(link, eta(i), y[static_cast<std::size_t>(i)]);
    resid_weight(i) = e.resid;
    info_weight(i) = e.info;
  }
  score = X.transpose() * resid_weight;
  info = X.transpose() * info_weight.asDiagonal() * X;
}

std::string direction_text(const FeatureSpec& spec, const Eigen::VectorXd& v) {
  std::ostringstream os;
  const double norm = v.norm();
  for (std::size_t k = 0; k < spec.size(); ++k) {
    os << (k ? ", " : "") << spec.terms()[k].label() << ": "
       << (norm > 0.0 ? v(static_cast<Eigen::Index>(k)) / norm : 0.0);
  }
  return os.str();
}

void check_dimension(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw Error(ErrorCode::domain, std::string(what) + ": expected " + std::to_string(expected) +
                                       " covariates, got " + std::to_string(got));
  }
}

}  // namespace

PropensityFit fit_propensity(const Dataset& dataset, const FeatureSpec& spec,
                             const PropensityOptions& options) {
  check_spec_against(spec, dataset.covariate_count());
  std::vector<const UnitRecord*> used;
  for (const auto& u : dataset.units) {
    if (!options.pipeline || options.pipeline->in_range(u.x, dataset.thresholds)) {
      used.push_back(&u);
    }
  }
  std::vector<int> y;
  y.reserve(used.size());
  std::size_t ones = 0;
  for (const auto* u : used) {
    y.push_back(u->d);
    ones += static_cast<std::size_t>(u->d);
  }
  if (used.empty() || ones == 0 || ones == used.size()) {
    throw Error(ErrorCode::separation,
                "perfect separation: every unit has d = " +
                    std::string(ones == 0 ? "0" : "1") +
                    "; likelihood is unbounded along the intercept direction (" +
                    (ones == 0 ? "-inf" : "+inf") + ")");
  }
  if (used.size() < spec.size()) {
    throw Error(ErrorCode::sample_size, "propensity fit needs at least " +
                                            std::to_string(spec.size()) + " units");
  }

  const Eigen::MatrixXd X = design_matrix(used, spec);
  require_full_rank(X, spec, "propensity");

  const Eigen::Index p = X.cols();
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = X * gamma;
  double ll = log_likelihood(options.link, eta, y);

  PropensityFit fit;
  fit.spec = spec;
  fit.link = options.link;
  fit.n_used = used.size();
  fit.covariate_count = dataset.covariate_count();

  Eigen::VectorXd score;
  Eigen::MatrixXd info;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    score_and_information(options.link, X, eta, y, score, info);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
      if (eta.cwiseAbs().maxCoeff() > 30.0) {
        // Information vanishes because the fitted probabilities saturate.
        throw Error(ErrorCode::separation,
                    "perfect separation suspected: coefficients diverge along direction (" +
                        direction_text(spec, gamma) + ")");
      }
      throw Error(ErrorCode::rank, "propensity information matrix is singular at iteration " +
                                       std::to_string(iter));
    }
    const Eigen::VectorXd step = ldlt.solve(score);
    fit.iterations = iter;
    if (step.lpNorm<Eigen::Infinity>() < options.step_tolerance) {
      // Below the tolerance the likelihood change is lost in rounding; take the
      // step without a line search.
      gamma += step;
      eta = X * gamma;
      ll = log_likelihood(options.link, eta, y);
      fit.converged = true;
      break;
    }

    double scale = 1.0;
    Eigen::VectorXd candidate = gamma + step;
    Eigen::VectorXd candidate_eta = X * candidate;
    double candidate_ll = log_likelihood(options.link, candidate_eta, y);
    int halvings = 0;
    while (!(candidate_ll >= ll) && halvings < options.max_halvings) {
      scale *= 0.5;
      ++halvings;
      candidate = gamma + scale * step;
      candidate_eta = X * candidate;
      candidate_ll = log_likelihood(options.link, candidate_eta, y);
    }
    if (!(candidate_ll >= ll)) break;  // no ascent direction left at this precision

    gamma = std::move(candidate);
    eta = std::move(candidate_eta);
    ll = candidate_ll;
    if ((scale * step).lpNorm<Eigen::Infinity>() < options.step_tolerance) {
      fit.converged = true;
      break;
    }
  }

  score_and_information(options.link, X, eta, y, score, info);
  fit.gamma = gamma;
  fit.log_likelihood = ll;
  fit.score_norm = score.lpNorm<Eigen::Infinity>();
  if (!fit.converged && eta.cwiseAbs().maxCoeff() > 30.0) {
    throw Error(ErrorCode::separation,
                "perfect separation suspected: coefficients diverge along direction (" +
                    direction_text(spec, gamma) + ")");
  }
  return fit;
}

PropensityFit make_propensity(const FeatureSpec& spec, Eigen::VectorXd gamma,
                              std::size_t covariate_count, Link link) {
  check_spec_against(spec, covariate_count);
  if (gamma.size() != static_cast<Eigen::Index>(spec.size())) {
    throw Error(ErrorCode::configuration, "gamma length does not match spec " + spec.joined());
  }
  PropensityFit fit;
  fit.gamma = std::move(gamma);
  fit.spec = spec;
  fit.link = link;
  fit.converged = true;
  fit.covariate_count = covariate_count;
  return fit;
}

double predict_propensity(const PropensityFit& fit, double x, std::span<const double> w) {
  check_dimension(fit.covariate_count, w.size(), "predict_propensity");
  double eta = 0.0;
  for (std::size_t k = 0; k < fit.spec.size(); ++k) {
    eta += fit.gamma(static_cast<Eigen::Index>(k)) * fit.spec.terms()[k].evaluate(x, w);
  }
  const double p = evaluate_link(fit.link, eta, 1).mu;
  return std::clamp(p, kPropensityFloor, 1.0 - kPropensityFloor);
}

OutcomeFit fit_outcome(const Dataset& dataset, TargetOutcome target, const FeatureSpec& spec) {
  check_spec_against(spec, dataset.covariate_count());
  std::vector<const UnitRecord*> used;
  std::vector<double> y;
  for (const auto& u : dataset.units) {
    if (target.observed(u)) {
      used.push_back(&u);
      y.push_back(u.y);
    }
  }
  if (used.size() < spec.size()) {
    throw Error(ErrorCode::sample_size,
                "outcome fit for Y" + std::to_string(target.j()) + " has " +
                    std::to_string(used.size()) + " units with z = " +
                    std::to_string(target.j()) + ", needs at least " +
                    std::to_string(spec.size()));
  }
  const Eigen::MatrixXd X = design_matrix(used, spec);
  require_full_rank(X, spec, "outcome");
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));

  OutcomeFit fit;
  fit.eta = X.colPivHouseholderQr().solve(yv);
  fit.spec = spec;
  fit.target = target;
  fit.n_used = used.size();
  fit.covariate_count = dataset.covariate_count();
  return fit;
}

OutcomeFit make_outcome(const FeatureSpec& spec, Eigen::VectorXd eta, TargetOutcome target,
                        std::size_t covariate_count) {
  check_spec_against(spec, covariate_count);
  if (eta.size() != static_cast<Eigen::Index>(spec.size())) {
    throw Error(ErrorCode::configuration, "eta length does not match spec " + spec.joined());
  }
  OutcomeFit fit;
  fit.eta = std::move(eta);
  fit.spec = spec;
  fit.target = target;
  fit.covariate_count = covariate_count;
  return fit;
}

double predict_outcome(const OutcomeFit& fit, double x, std::span<const double> w) {
  check_dimension(fit.covariate_count, w.size(), "predict_outcome");
  double v = 0.0;
  for (std::size_t k = 0; k < fit.spec.size(); ++k) {
    v += fit.eta(static_cast<Eigen::Index>(k)) * fit.spec.terms()[k].evaluate(x, w);
  }
  return v;
}

}  // namespace rdmc
