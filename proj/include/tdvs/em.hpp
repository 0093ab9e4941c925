#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "tdvs/model.hpp"

namespace tdvs {

struct EMConfig {
  double convergence_tol = 1e-7;  // L2 norm of the (beta0, beta, nu, gamma, theta) change
  int max_iterations = 500;
  double coordinate_sweep_tol = 1e-6;
  int max_sweeps_per_mstep = 50;
  int line_search_expansions = 30;

  void validate() const;
};

struct FitResult {
  RegressionParams params;
  Eigen::VectorXd inclusion_probs;  // E-step probabilities at the final estimate
  int iterations = 0;
  bool converged = false;
  double final_marginal_log_posterior = 0.0;
  std::vector<double> objective_trace;  // marginal log posterior, initial point first
  int retained_updates = 0;             // 1-D searches that found no improvement
};

/// Posterior probability that covariate j belongs to the slab, given its
/// current coefficient and theta.
double e_step_inclusion_prob(double beta_j, double theta, double t0, double t1);

Eigen::VectorXd e_step(const Eigen::VectorXd& beta, double theta, const Hyperparams& hyper);

/// Expected complete-data log posterior under independent Bernoulli(p_hat_j)
/// indicators. Normalizing constants are kept, so this differs from the
/// textbook surrogate only by a parameter-free constant.
double compute_q_objective(const Dataset& data, const RegressionParams& params,
                           const Eigen::VectorXd& p_hat, const Hyperparams& hyper);

/// Cyclic coordinate ascent on the modal log likelihood minus
/// sum_j w_j |beta_j|, w_j = (1 - p_hat_j) t0 + p_hat_j t1. Each coordinate
/// update compares the exact zero against a local maximizer on either side.
Eigen::VectorXd m_step_beta(const Dataset& data, const RegressionParams& state,
                            const Eigen::VectorXd& p_hat, const Hyperparams& hyper,
                            const EMConfig& config = {});

double update_beta0(const Dataset& data, const RegressionParams& state, const Hyperparams& hyper,
                    const EMConfig& config = {});
double update_nu(const Dataset& data, const RegressionParams& state, const Hyperparams& hyper,
                 const EMConfig& config = {});
double update_gamma(const Dataset& data, const RegressionParams& state, const Hyperparams& hyper,
                    const EMConfig& config = {});

/// (sum p_hat + a - 1) / (a + b + p - 2), clamped to [1e-8, 1 - 1e-8].
double update_theta(const Eigen::VectorXd& p_hat, double a, double b);

/// beta0 = median(y), beta = 0, nu = 5, gamma = 1, theta = 0.5.
RegressionParams default_init(const Dataset& data);

FitResult fit(const Dataset& data, const Hyperparams& hyper, const EMConfig& config = {},
              const std::optional<RegressionParams>& init = std::nullopt);

namespace detail {

inline constexpr double kNuLower = 0.05;
inline constexpr double kNuUpper = 200.0;
inline constexpr double kGammaLower = 0.05;
inline constexpr double kGammaUpper = 20.0;

struct Update {
  double value;
  bool improved;
};

/// Intercept update from offsets o_i = y_i - x_i' beta. Accepts an empty span.
Update update_beta0(std::span<const double> offsets, double beta0, double nu, double gamma,
                    double prior_variance, int expansions);
Update update_nu(std::span<const double> resid, double nu, double gamma, int expansions);
Update update_gamma(std::span<const double> resid, double nu, double gamma, double c, double d,
                    int expansions);

}  // namespace detail

}  // namespace tdvs
