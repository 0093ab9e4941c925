#include "tdvs/model.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "tdvs/errors.hpp"
#include "tdvs/mixhat.hpp"

namespace tdvs {

namespace {

double log_add_exp(double a, double b) {
  const double hi = std::max(a, b);
  if (hi == -std::numeric_limits<double>::infinity()) return hi;
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd covariates, Eigen::VectorXd response,
                 std::vector<std::string> column_names)
    : x_(std::move(covariates)), y_(std::move(response)), names_(std::move(column_names)) {
  if (x_.rows() != y_.size()) {
    throw InputError(InputErrorCode::kDimension,
                     "covariate rows (" + std::to_string(x_.rows()) + ") != response length (" +
                         std::to_string(y_.size()) + ")");
  }
  if (x_.rows() < 2) throw InputError(InputErrorCode::kDimension, "need at least 2 observations");
  if (x_.cols() < 1) throw InputError(InputErrorCode::kDimension, "need at least 1 covariate");
  if (!x_.allFinite() || !y_.allFinite()) {
    throw InputError(InputErrorCode::kParse, "dataset contains non-finite values");
  }
  if (names_.empty()) {
    names_.reserve(static_cast<std::size_t>(x_.cols()));
    for (Eigen::Index j = 0; j < x_.cols(); ++j) names_.push_back("x" + std::to_string(j + 1));
  } else if (static_cast<Eigen::Index>(names_.size()) != x_.cols()) {
    throw InputError(InputErrorCode::kDimension, "column name count does not match covariates");
  }
}

std::vector<Eigen::Index> Dataset::constant_columns() const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index j = 0; j < x_.cols(); ++j) {
    if ((x_.col(j).array() == x_(0, j)).all()) out.push_back(j);
  }
  return out;
}

Dataset Dataset::with_covariates(Eigen::MatrixXd covariates) const {
  return Dataset(std::move(covariates), y_, names_);
}

Dataset Dataset::rows(const std::vector<Eigen::Index>& index) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(index.size()), x_.cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(index.size()));
  for (std::size_t i = 0; i < index.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = x_.row(index[i]);
    y(static_cast<Eigen::Index>(i)) = y_(index[i]);
  }
  return Dataset(std::move(x), std::move(y), names_);
}

void RegressionParams::validate() const {
  if (!(nu > 0.0)) throw DomainError("nu must be positive");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("theta must lie in (0, 1)");
}

Eigen::VectorXd RegressionParams::flatten() const {
  Eigen::VectorXd v(beta.size() + 4);
  v(0) = beta0;
  v.segment(1, beta.size()) = beta;
  v(beta.size() + 1) = nu;
  v(beta.size() + 2) = gamma;
  v(beta.size() + 3) = theta;
  return v;
}

Hyperparams Hyperparams::defaults(Eigen::Index p, double t0, double t1) {
  Hyperparams h;
  h.t0 = t0;
  h.t1 = t1;
  h.b = static_cast<double>(p);
  return h;
}

void Hyperparams::validate() const {
  for (double v : {t0, t1, a, b, c, d, beta0_prior_variance}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("hyperparameters must be positive");
  }
}

IndicatorVector::IndicatorVector(std::vector<std::uint8_t> lambda) : lambda_(std::move(lambda)) {
  for (auto v : lambda_) {
    if (v > 1) throw DomainError("indicator entries must be 0 or 1");
  }
}

IndicatorVector IndicatorVector::from_mask(std::uint64_t mask, std::size_t p) {
  std::vector<std::uint8_t> v(p);
  for (std::size_t j = 0; j < p; ++j) v[j] = static_cast<std::uint8_t>((mask >> j) & 1U);
  return IndicatorVector(std::move(v));
}

std::size_t IndicatorVector::count() const {
  std::size_t c = 0;
  for (auto v : lambda_) c += v;
  return c;
}

Eigen::VectorXd residuals(const Dataset& data, double beta0, const Eigen::VectorXd& beta) {
  if (beta.size() != data.p()) {
    throw InputError(InputErrorCode::kDimension, "coefficient length does not match covariates");
  }
  Eigen::VectorXd r = data.response() - data.covariates() * beta;
  r.array() -= beta0;
  return r;
}

double log_likelihood(const Dataset& data, const RegressionParams& params) {
  const MixHatKernel k(MixHatParams(params.nu, params.gamma));
  const Eigen::VectorXd r = residuals(data, params.beta0, params.beta);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) sum += k.log_kernel(r(i));
  return sum + static_cast<double>(r.size()) * k.log_norm;
}

double log_laplace(double s, double rate) { return std::log(0.5 * rate) - rate * std::abs(s); }

double log_beta0_prior(double beta0, double variance) {
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * beta0 * beta0 / variance;
}

double log_nu_prior(double nu) {
  const double z = std::log(nu) - 1.0;
  return -std::log(nu) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
}

double log_gamma_prior(double gamma, double shape, double rate) {
  return shape * std::log(rate) - boost::math::lgamma(shape) + (shape - 1.0) * std::log(gamma) -
         rate * gamma;
}

double log_theta_prior(double theta, double a, double b) {
  return (a - 1.0) * std::log(theta) + (b - 1.0) * std::log1p(-theta) -
         std::log(boost::math::beta(a, b));
}

double log_prior_complete(const RegressionParams& params, const Hyperparams& hyper,
                          const IndicatorVector& lambda) {
  if (lambda.size() != static_cast<std::size_t>(params.beta.size())) {
    throw InputError(InputErrorCode::kDimension, "indicator length does not match coefficients");
  }
  const auto p = static_cast<double>(params.beta.size());
  const auto included = static_cast<double>(lambda.count());
  double sum = log_beta0_prior(params.beta0, hyper.beta0_prior_variance);
  for (Eigen::Index j = 0; j < params.beta.size(); ++j) {
    const double rate = lambda.included(static_cast<std::size_t>(j)) ? hyper.t1 : hyper.t0;
    sum += log_laplace(params.beta(j), rate);
  }
  sum += included * std::log(params.theta) + (p - included) * std::log1p(-params.theta);
  sum += log_theta_prior(params.theta, hyper.a, hyper.b);
  sum += log_nu_prior(params.nu);
  sum += log_gamma_prior(params.gamma, hyper.c, hyper.d);
  return sum;
}

double log_marginal_posterior(const Dataset& data, const RegressionParams& params,
                              const Hyperparams& hyper) {
  double sum = log_likelihood(data, params);
  sum += log_beta0_prior(params.beta0, hyper.beta0_prior_variance);
  const double log_spike_w = std::log1p(-params.theta);
  const double log_slab_w = std::log(params.theta);
  for (Eigen::Index j = 0; j < params.beta.size(); ++j) {
    sum += log_add_exp(log_spike_w + log_laplace(params.beta(j), hyper.t0),
                       log_slab_w + log_laplace(params.beta(j), hyper.t1));
  }
  sum += log_theta_prior(params.theta, hyper.a, hyper.b);
  sum += log_nu_prior(params.nu);
  sum += log_gamma_prior(params.gamma, hyper.c, hyper.d);
  return sum;
}

}  // namespace tdvs
