#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace tdvs {

/// Covariates (n x p) and response (n). Construction enforces n >= 2,
/// p >= 1 and finite entries.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd covariates, Eigen::VectorXd response,
          std::vector<std::string> column_names = {});

  const Eigen::MatrixXd& covariates() const { return x_; }
  const Eigen::VectorXd& response() const { return y_; }
  const std::vector<std::string>& column_names() const { return names_; }

  Eigen::Index n() const { return x_.rows(); }
  Eigen::Index p() const { return x_.cols(); }

  /// Indices of columns whose values are all identical.
  std::vector<Eigen::Index> constant_columns() const;

  /// Same response, covariates replaced. Used for permuted copies.
  Dataset with_covariates(Eigen::MatrixXd covariates) const;

  /// Subset of rows, in the given order.
  Dataset rows(const std::vector<Eigen::Index>& index) const;

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  std::vector<std::string> names_;
};

/// The estimated block (beta0, beta, nu, gamma, theta).
struct RegressionParams {
  double beta0 = 0.0;
  Eigen::VectorXd beta;
  double nu = 5.0;
  double gamma = 1.0;
  double theta = 0.5;

  /// Throws DomainError unless nu > 0, gamma > 0 and 0 < theta < 1.
  void validate() const;

  /// Flattened (beta0, beta..., nu, gamma, theta).
  Eigen::VectorXd flatten() const;
};

struct Hyperparams {
  double t0 = 10.0;  // spike rate
  double t1 = 1.0;   // slab rate
  double a = 1.0;
  double b = 1.0;
  double c = 1e-4;
  double d = 1e-4;
  double beta0_prior_variance = 1e6;

  /// a = 1, b = p, c = d = 1e-4, intercept prior variance 1e6.
  static Hyperparams defaults(Eigen::Index p, double t0 = 10.0, double t1 = 1.0);

  void validate() const;
};

/// Binary inclusion indicators lambda_j.
class IndicatorVector {
 public:
  explicit IndicatorVector(std::vector<std::uint8_t> lambda);
  static IndicatorVector from_mask(std::uint64_t mask, std::size_t p);

  std::size_t size() const { return lambda_.size(); }
  bool included(std::size_t j) const { return lambda_[j] != 0; }
  std::size_t count() const;

 private:
  std::vector<std::uint8_t> lambda_;
};

Eigen::VectorXd residuals(const Dataset& data, double beta0, const Eigen::VectorXd& beta);

/// Sum of MixHat log densities of the residuals, normalizing constants included.
double log_likelihood(const Dataset& data, const RegressionParams& params);

double log_laplace(double s, double rate);
double log_beta0_prior(double beta0, double variance);
double log_nu_prior(double nu);
double log_gamma_prior(double gamma, double shape, double rate);
double log_theta_prior(double theta, double a, double b);

/// log pi(beta0) pi(beta | lambda) pi(lambda | theta) pi(theta) pi(nu) pi(gamma).
double log_prior_complete(const RegressionParams& params, const Hyperparams& hyper,
                          const IndicatorVector& lambda);

/// Log posterior with lambda summed out: each beta_j gets the two-point
/// mixture (1 - theta) psi(beta_j | t0) + theta psi(beta_j | t1).
double log_marginal_posterior(const Dataset& data, const RegressionParams& params,
                              const Hyperparams& hyper);

}  // namespace tdvs
