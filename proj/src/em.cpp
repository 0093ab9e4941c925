#include "tdvs/em.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <limits>

#include "ascent.hpp"
#include "tdvs/errors.hpp"
#include "tdvs/mixhat.hpp"

namespace tdvs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kThetaFloor = 1e-8;

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

double sum_log_kernel(const MixHatKernel& k, std::span<const double> resid) {
  double s = 0.0;
  for (double e : resid) s += k.log_kernel(e);
  return s;
}

double sum_logpdf(std::span<const double> resid, double nu, double gamma) {
  const MixHatKernel k(MixHatParams(nu, gamma));
  return sum_log_kernel(k, resid) + static_cast<double>(resid.size()) * k.log_norm;
}

double median(Eigen::VectorXd v) {
  const auto n = static_cast<std::size_t>(v.size());
  auto* first = v.data();
  std::nth_element(first, first + n / 2, first + n);
  const double upper = first[n / 2];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(first, first + n / 2);
  return 0.5 * (lower + upper);
}

struct CoordinateSearch {
  const Eigen::Ref<const Eigen::VectorXd>& x;
  const Eigen::VectorXd& r;  // residuals at the current coefficient
  const MixHatKernel& k;
  double current;
  double weight;

  // Penalized restricted objective at coefficient value `b`.
  double value(double b) const {
    const double shift = b - current;
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) s += k.log_kernel(r(i) - x(i) * shift);
    return s - weight * std::abs(b);
  }

  // Derivatives of the unpenalized log likelihood in b.
  detail::Slope likelihood_slope(double b, bool curvature) const {
    const double shift = b - current;
    double d1 = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) d1 -= x(i) * k.score(r(i) - x(i) * shift);
    if (!curvature) return {d1};
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      d2 += x(i) * x(i) * k.score_slope(r(i) - x(i) * shift);
    }
    return {d1, d2};
  }
};

}  // namespace

void EMConfig::validate() const {
  if (!(convergence_tol > 0.0 && convergence_tol < 1.0)) {
    throw DomainError("convergence_tol must lie in (0, 1)");
  }
  if (max_iterations < 1 || max_sweeps_per_mstep < 1 || line_search_expansions < 1) {
    throw DomainError("EM iteration limits must be positive");
  }
  if (!(coordinate_sweep_tol > 0.0)) throw DomainError("coordinate_sweep_tol must be positive");
}

double e_step_inclusion_prob(double beta_j, double theta, double t0, double t1) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0, 1)");
  if (!(t0 > 0.0 && t1 > 0.0)) throw DomainError("rates must be positive");
  // Equal rates cancel the ratio and the exponential, leaving the prior odds.
  if (t0 == t1) return theta;
  const double log_odds = std::log(t1 / t0) + std::log(theta) - std::log1p(-theta) +
                          (t0 - t1) * std::abs(beta_j);
  if (log_odds >= 0.0) return 1.0 / (1.0 + std::exp(-log_odds));
  const double e = std::exp(log_odds);
  return e / (1.0 + e);
}

Eigen::VectorXd e_step(const Eigen::VectorXd& beta, double theta, const Hyperparams& hyper) {
  Eigen::VectorXd p(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    p(j) = e_step_inclusion_prob(beta(j), theta, hyper.t0, hyper.t1);
  }
  return p;
}

double compute_q_objective(const Dataset& data, const RegressionParams& params,
                           const Eigen::VectorXd& p_hat, const Hyperparams& hyper) {
  if (p_hat.size() != params.beta.size()) {
    throw InputError(InputErrorCode::kDimension, "p_hat length does not match coefficients");
  }
  const auto p = static_cast<double>(params.beta.size());
  double q = log_likelihood(data, params);
  q += log_beta0_prior(params.beta0, hyper.beta0_prior_variance);
  for (Eigen::Index j = 0; j < params.beta.size(); ++j) {
    const double spike = log_laplace(params.beta(j), hyper.t0);
    // slab correction: p_hat_j { log(t1/t0) - (t1 - t0)|beta_j| }
    q += spike + p_hat(j) * (log_laplace(params.beta(j), hyper.t1) - spike);
  }
  const double included = p_hat.sum();
  q += included * std::log(params.theta) + (p - included) * std::log1p(-params.theta);
  q += log_theta_prior(params.theta, hyper.a, hyper.b);
  q += log_nu_prior(params.nu);
  q += log_gamma_prior(params.gamma, hyper.c, hyper.d);
  return q;
}

Eigen::VectorXd m_step_beta(const Dataset& data, const RegressionParams& state,
                            const Eigen::VectorXd& p_hat, const Hyperparams& hyper,
                            const EMConfig& config) {
  const Eigen::MatrixXd& X = data.covariates();
  const MixHatKernel k(MixHatParams(state.nu, state.gamma));
  Eigen::VectorXd beta = state.beta;
  Eigen::VectorXd r = residuals(data, state.beta0, beta);
  const auto n = static_cast<double>(data.n());

  for (int sweep = 0; sweep < config.max_sweeps_per_mstep; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const Eigen::Ref<const Eigen::VectorXd> xj = X.col(j);
      const double b = beta(j);
      const double w = (1.0 - p_hat(j)) * hyper.t0 + p_hat(j) * hyper.t1;
      const CoordinateSearch search{xj, r, k, b, w};
      const double col_rms = std::sqrt(xj.squaredNorm() / n);
      if (col_rms == 0.0) {
        // An all-zero column carries no likelihood information.
        if (b != 0.0) {
          beta(j) = 0.0;
          max_change = std::max(max_change, std::abs(b));
        }
        continue;
      }

      // Candidates: the kink at zero and a local maximizer on each side.
      double candidates[3] = {0.0, 0.0, 0.0};
      int num_candidates = 0;
      if (b != 0.0) candidates[num_candidates++] = 0.0;
      for (const double side : {1.0, -1.0}) {
        const double start = b * side > 0.0 ? std::abs(b) : 0.0;
        auto slope = [&](double t, bool curvature) {
          const detail::Slope s = search.likelihood_slope(side * t, curvature);
          return detail::Slope{side * s.d1 - w, s.d2};
        };
        if (start == 0.0 && slope(0.0, false).d1 <= 0.0) continue;
        const double t = detail::ascend_1d(slope, start, 0.0, kInf, 1.0 / col_rms,
                                           config.line_search_expansions);
        const double cand = side * t;
        if (cand != b && cand != 0.0) candidates[num_candidates++] = cand;
      }
      if (num_candidates == 0) continue;

      double best = b;
      double best_value = search.value(b);
      for (int c = 0; c < num_candidates; ++c) {
        const double v = search.value(candidates[c]);
        if (v > best_value) {
          best_value = v;
          best = candidates[c];
        }
      }
      if (best != b) {
        r -= (best - b) * xj;
        beta(j) = best;
        max_change = std::max(max_change, std::abs(best - b));
      }
    }
    if (max_change < config.coordinate_sweep_tol) break;
  }
  return beta;
}

namespace detail {

Update update_beta0(std::span<const double> offsets, double beta0, double nu, double gamma,
                    double prior_variance, int expansions) {
  const MixHatKernel k(MixHatParams(nu, gamma));
  auto value = [&](double b0) {
    double s = 0.0;
    for (double o : offsets) s += k.log_kernel(o - b0);
    return s - 0.5 * b0 * b0 / prior_variance;
  };
  auto slope = [&](double b0, bool curvature) {
    double d1 = -b0 / prior_variance;
    for (double o : offsets) d1 -= k.score(o - b0);
    if (!curvature) return Slope{d1};
    double d2 = -1.0 / prior_variance;
    for (double o : offsets) d2 += k.score_slope(o - b0);
    return Slope{d1, d2};
  };
  const double cand = ascend_1d(slope, beta0, -kInf, kInf, 1.0, expansions);
  if (cand != beta0 && value(cand) > value(beta0)) return {cand, true};
  return {beta0, false};
}

Update update_nu(std::span<const double> resid, double nu, double gamma, int expansions) {
  const double g2 = gamma * gamma;
  const auto n = static_cast<double>(resid.size());
  auto slope = [&](double log_nu, bool) {
    const double v = std::exp(log_nu);
    double d = n * 0.5 *
               (boost::math::digamma(0.5 * (v + 1.0)) - boost::math::digamma(0.5 * v) - 1.0 / v);
    for (double e : resid) {
      const double q = e * e * (e >= 0.0 ? 1.0 / g2 : g2);
      d += -0.5 * std::log1p(q / v) + 0.5 * (v + 1.0) * q / (v * (v + q));
    }
    // chain rule to log scale, plus the lognormal prior
    return Slope{v * d - 1.0 - (log_nu - 1.0)};
  };
  const double start = std::log(std::clamp(nu, kNuLower, kNuUpper));
  const double cand = std::exp(
      ascend_1d(slope, start, std::log(kNuLower), std::log(kNuUpper), 0.1, expansions));
  auto value = [&](double v) { return sum_logpdf(resid, v, gamma) + log_nu_prior(v); };
  if (cand != nu && value(cand) > value(nu)) {
    return {cand, true};
  }
  return {nu, false};
}

Update update_gamma(std::span<const double> resid, double nu, double gamma, double c, double d,
                    int expansions) {
  const auto n = static_cast<double>(resid.size());
  auto slope = [&](double log_gamma, bool) {
    const double g = std::exp(log_gamma);
    const double g2 = g * g;
    double s = n * (1.0 - 2.0 * g2 / (1.0 + g2)) + (c - 1.0) - d * g;
    for (double e : resid) {
      const bool right = e >= 0.0;
      const double q = e * e * (right ? 1.0 / g2 : g2);
      const double dq = right ? -2.0 * q : 2.0 * q;
      s -= 0.5 * (nu + 1.0) * dq / (nu + q);
    }
    return Slope{s};
  };
  const double start = std::log(std::clamp(gamma, kGammaLower, kGammaUpper));
  const double cand = std::exp(
      ascend_1d(slope, start, std::log(kGammaLower), std::log(kGammaUpper), 0.1, expansions));
  auto value = [&](double g) { return sum_logpdf(resid, nu, g) + log_gamma_prior(g, c, d); };
  if (cand != gamma && value(cand) > value(gamma)) {
    return {cand, true};
  }
  return {gamma, false};
}

}  // namespace detail

double update_beta0(const Dataset& data, const RegressionParams& state, const Hyperparams& hyper,
                    const EMConfig& config) {
  const Eigen::VectorXd offsets = data.response() - data.covariates() * state.beta;
  return detail::update_beta0(as_span(offsets), state.beta0, state.nu, state.gamma,
                              hyper.beta0_prior_variance, config.line_search_expansions)
      .value;
}

double update_nu(const Dataset& data, const RegressionParams& state, const Hyperparams&,
                 const EMConfig& config) {
  const Eigen::VectorXd r = residuals(data, state.beta0, state.beta);
  return detail::update_nu(as_span(r), state.nu, state.gamma, config.line_search_expansions).value;
}

double update_gamma(const Dataset& data, const RegressionParams& state, const Hyperparams& hyper,
                    const EMConfig& config) {
  const Eigen::VectorXd r = residuals(data, state.beta0, state.beta);
  return detail::update_gamma(as_span(r), state.nu, state.gamma, hyper.c, hyper.d,
                              config.line_search_expansions)
      .value;
}

double update_theta(const Eigen::VectorXd& p_hat, double a, double b) {
  const auto p = static_cast<double>(p_hat.size());
  const double denom = a + b + p - 2.0;
  if (!(denom > 0.0)) throw DomainError("update_theta: a + b + p - 2 must be positive");
  const double theta = (p_hat.sum() + a - 1.0) / denom;
  return std::clamp(theta, kThetaFloor, 1.0 - kThetaFloor);
}

RegressionParams default_init(const Dataset& data) {
  RegressionParams init;
  init.beta0 = median(data.response());
  init.beta = Eigen::VectorXd::Zero(data.p());
  init.nu = 5.0;
  init.gamma = 1.0;
  init.theta = 0.5;
  return init;
}

FitResult fit(const Dataset& data, const Hyperparams& hyper, const EMConfig& config,
              const std::optional<RegressionParams>& init) {
  hyper.validate();
  config.validate();
  RegressionParams state = init ? *init : default_init(data);
  if (state.beta.size() != data.p()) {
    throw InputError(InputErrorCode::kDimension, "initial coefficients do not match covariates");
  }
  state.validate();

  FitResult result;
  auto checked_objective = [&](const RegressionParams& params, int iteration) {
    const double v = log_marginal_posterior(data, params, hyper);
    if (!std::isfinite(v)) throw NumericalError("non-finite objective", iteration);
    return v;
  };
  result.objective_trace.push_back(checked_objective(state, 0));

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const Eigen::VectorXd p_hat = e_step(state.beta, state.theta, hyper);
    RegressionParams next = state;

    next.beta = m_step_beta(data, next, p_hat, hyper, config);

    const Eigen::VectorXd offsets = data.response() - data.covariates() * next.beta;
    const auto b0 = detail::update_beta0(as_span(offsets), next.beta0, next.nu, next.gamma,
                                         hyper.beta0_prior_variance,
                                         config.line_search_expansions);
    next.beta0 = b0.value;

    Eigen::VectorXd r = offsets.array() - next.beta0;
    const auto nu = detail::update_nu(as_span(r), next.nu, next.gamma,
                                      config.line_search_expansions);
    next.nu = nu.value;
    const auto gamma = detail::update_gamma(as_span(r), next.nu, next.gamma, hyper.c, hyper.d,
                                            config.line_search_expansions);
    next.gamma = gamma.value;
    next.theta = update_theta(p_hat, hyper.a, hyper.b);
    result.retained_updates += !nu.improved + !gamma.improved;

    if (!next.flatten().allFinite()) throw NumericalError("non-finite parameter", iter);
    const double change = (next.flatten() - state.flatten()).norm();
    state = std::move(next);
    result.objective_trace.push_back(checked_objective(state, iter));
    result.iterations = iter;
    if (change < config.convergence_tol) {
      result.converged = true;
      break;
    }
  }

  result.params = state;
  result.inclusion_probs = e_step(state.beta, state.theta, hyper);
  result.final_marginal_log_posterior = result.objective_trace.back();
  return result;
}

}  // namespace tdvs
