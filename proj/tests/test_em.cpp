#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tdvs/em.hpp"
#include "tdvs/errors.hpp"
#include "tdvs/mixhat.hpp"

using namespace tdvs;

namespace {

Dataset mixhat_data(Eigen::Index n, const Eigen::VectorXd& beta, double beta0, double nu,
                    double gamma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd X(n, beta.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < beta.size(); ++j) X(i, j) = z(rng);
  }
  const auto e = mixhat_sample({nu, gamma}, static_cast<std::size_t>(n), rng);
  Eigen::VectorXd y = X * beta;
  for (Eigen::Index i = 0; i < n; ++i) y(i) += beta0 + e[static_cast<std::size_t>(i)];
  return Dataset(X, y);
}

double eq7_objective(const Dataset& d, const RegressionParams& state, const Eigen::VectorXd& beta,
                     const Eigen::VectorXd& w) {
  RegressionParams q = state;
  q.beta = beta;
  return log_likelihood(d, q) - w.dot(beta.cwiseAbs());
}

double nu_objective(const Dataset& d, const RegressionParams& q) {
  return log_likelihood(d, q) + log_nu_prior(q.nu);
}

double gamma_objective(const Dataset& d, const RegressionParams& q, const Hyperparams& h) {
  return log_likelihood(d, q) + log_gamma_prior(q.gamma, h.c, h.d);
}

}  // namespace

TEST_CASE("E-step inclusion probability") {
  CHECK(e_step_inclusion_prob(0.0, 0.5, 10, 1) == doctest::Approx(1.0 / 11.0).epsilon(1e-15));
  const double transcribed = 1 / (1 + (10.0 / 1.0) * ((1 - 0.3) / 0.3) * std::exp(-(10.0 - 1.0) * 0.2));
  CHECK(e_step_inclusion_prob(-0.2, 0.3, 10, 1) == doctest::Approx(transcribed).epsilon(1e-14));
  CHECK(e_step_inclusion_prob(1e4, 0.5, 10, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(e_step_inclusion_prob(0.0, 0.0, 10, 1), DomainError);
  CHECK_THROWS_AS(e_step_inclusion_prob(0.0, 1.0, 10, 1), DomainError);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  std::normal_distribution<double> z(0, 5);
  for (int k = 0; k < 1000; ++k) {
    const double theta = u(rng);
    const double t = 0.1 + 10 * u(rng);
    REQUIRE(e_step_inclusion_prob(z(rng), theta, t, t) == theta);
  }
  double last = -1;
  for (double b = 0; b < 3; b += 0.05) {
    const double v = e_step_inclusion_prob(-b, 0.4, 10, 1);
    CHECK(v > last);
    last = v;
  }
}

TEST_CASE("Q objective equals expected complete log posterior") {
  for (Eigen::Index p = 1; p <= 3; ++p) {
    Eigen::VectorXd beta = Eigen::VectorXd::LinSpaced(p, -0.7, 1.1);
    const Dataset d = mixhat_data(15, beta, 1, 3, 2, 40 + static_cast<std::uint64_t>(p));
    RegressionParams q;
    q.beta0 = 0.8;
    q.beta = beta * 0.9;
    q.nu = 4;
    q.gamma = 1.6;
    q.theta = 0.35;
    const Hyperparams h = Hyperparams::defaults(p);
    Eigen::VectorXd p_hat = Eigen::VectorXd::LinSpaced(p, 0.15, 0.8);
    double expected = 0;
    for (unsigned mask = 0; mask < (1u << p); ++mask) {
      double prob = 1;
      for (Eigen::Index j = 0; j < p; ++j) prob *= (mask >> j) & 1u ? p_hat(j) : 1 - p_hat(j);
      expected += prob * (log_likelihood(d, q) + log_prior_complete(q, h, IndicatorVector::from_mask(mask, static_cast<std::size_t>(p))));
    }
    CHECK(compute_q_objective(d, q, p_hat, h) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("Q objective pieces") {
  Eigen::VectorXd beta(2);
  beta << 0.5, -0.25;
  const Dataset d = mixhat_data(10, beta, 0, 3, 1, 2);
  RegressionParams q;
  q.beta = beta;
  Hyperparams h = Hyperparams::defaults(2, 3, 3);
  // equal rates: the slab correction vanishes, so p_hat only enters via theta
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  double spike = 0;
  for (double b : {0.5, -0.25}) spike += std::log(oracle::laplace_pdf(b, 3));
  const double rest = log_likelihood(d, q) + log_beta0_prior(0, h.beta0_prior_variance) + 2 * std::log1p(-q.theta) +
                      log_theta_prior(q.theta, h.a, h.b) + log_nu_prior(q.nu) + log_gamma_prior(q.gamma, h.c, h.d);
  CHECK(compute_q_objective(d, q, zero, h) == doctest::Approx(spike + rest).epsilon(1e-13));

  h = Hyperparams::defaults(2, 10, 1);
  const Eigen::VectorXd ph = Eigen::VectorXd::Constant(2, 0.3);
  const double before = compute_q_objective(d, q, ph, h) - log_likelihood(d, q);
  q.beta(0) = 0.9;
  const double after = compute_q_objective(d, q, ph, h) - log_likelihood(d, q);
  CHECK(after < before);
}

TEST_CASE("M-step for beta") {
  Eigen::VectorXd truth(2);
  truth << 2, 0;
  const Dataset d = mixhat_data(100, truth, 2, 3, 2, 11);
  RegressionParams state;
  state.beta0 = 2;
  state.beta = Eigen::VectorXd::Zero(2);
  state.nu = 3;
  state.gamma = 2;
  state.theta = 0.5;
  const Hyperparams h = Hyperparams::defaults(2, 10, 1);
  const Eigen::VectorXd p_hat = e_step(state.beta, state.theta, h);
  const Eigen::VectorXd w = (1 - p_hat.array()) * h.t0 + p_hat.array() * h.t1;

  const Eigen::VectorXd beta = m_step_beta(d, state, p_hat, h);
  const double achieved = eq7_objective(d, state, beta, w);
  double grid_best = -INFINITY;
  for (int a = 0; a < 200; ++a) {
    for (int b = 0; b < 200; ++b) {
      Eigen::VectorXd g(2);
      g << -3 + 6.0 * a / 199, -3 + 6.0 * b / 199;
      grid_best = std::max(grid_best, eq7_objective(d, state, g, w));
    }
  }
  CHECK(achieved >= grid_best - 1e-4);

  SUBCASE("huge weights give the zero vector") {
    const Hyperparams heavy = Hyperparams::defaults(2, 1e9, 1e9);
    const Eigen::VectorXd z = m_step_beta(d, state, p_hat, heavy);
    CHECK(z(0) == 0.0);
    CHECK(z(1) == 0.0);
  }
  SUBCASE("weights depend only on the rates when t0 == t1") {
    const Hyperparams eq = Hyperparams::defaults(2, 4, 4);
    CHECK(m_step_beta(d, state, Eigen::VectorXd::Ones(2), eq) ==
          m_step_beta(d, state, Eigen::VectorXd::Zero(2), eq));
  }
}

TEST_CASE("intercept update") {
  std::mt19937_64 rng(5);
  std::student_t_distribution<double> t(3);
  const Eigen::Index n = 4000;
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = 1.7 + t(rng);
  const Dataset d(Eigen::MatrixXd::Zero(n, 1), y);
  RegressionParams state;
  state.beta = Eigen::VectorXd::Zero(1);
  state.nu = 3;
  state.gamma = 1;
  const Hyperparams h = Hyperparams::defaults(1);
  const double b0 = update_beta0(d, state, h);

  auto objective = [&](double b) {
    RegressionParams q = state;
    q.beta0 = b;
    return log_likelihood(d, q) + log_beta0_prior(b, h.beta0_prior_variance);
  };
  double best_b = 0, best = -INFINITY;
  for (double b = 1.0; b <= 2.4; b += 1e-4) {
    if (objective(b) > best) {
      best = objective(b);
      best_b = b;
    }
  }
  CHECK(std::abs(b0 - best_b) < 2e-4);
  CHECK(objective(b0) >= best - 1e-9);
  CHECK(std::abs(b0 - 1.7) < 0.1);

  state.beta0 = b0;
  CHECK(std::abs(update_beta0(d, state, h) - b0) < 1e-7);

  const auto empty = detail::update_beta0({}, 3.0, 3, 1, 1e6, 30);
  CHECK(std::abs(empty.value) < 1e-9);
}

TEST_CASE("shape updates") {
  const Eigen::Index n = 2000;
  const Dataset d = mixhat_data(n, Eigen::VectorXd::Zero(1), 0, 3, 2, 21);
  RegressionParams state;
  state.beta = Eigen::VectorXd::Zero(1);
  state.nu = 5;
  state.gamma = 1;
  const Hyperparams h = Hyperparams::defaults(1);
  for (int round = 0; round < 30; ++round) {
    const double before_nu = nu_objective(d, state);
    state.nu = update_nu(d, state, h);
    CHECK(nu_objective(d, state) >= before_nu - 1e-10);
    const double before_gamma = gamma_objective(d, state, h);
    state.gamma = update_gamma(d, state, h);
    CHECK(gamma_objective(d, state, h) >= before_gamma - 1e-10);
  }
  CHECK(state.nu >= 2);
  CHECK(state.nu <= 5);
  CHECK(state.gamma >= 1.7);
  CHECK(state.gamma <= 2.3);

  SUBCASE("symmetric residuals give gamma = 1") {
    std::mt19937_64 rng(1);
    std::student_t_distribution<double> t(4);
    Eigen::VectorXd y(400);
    for (Eigen::Index i = 0; i < 200; ++i) {
      y(i) = t(rng);
      y(i + 200) = -y(i);
    }
    const Dataset sym(Eigen::MatrixXd::Zero(400, 1), y);
    RegressionParams s;
    s.beta = Eigen::VectorXd::Zero(1);
    s.nu = 4;
    s.gamma = 1.4;
    Hyperparams vague = Hyperparams::defaults(1);
    const double g = update_gamma(sym, s, vague);
    // the gamma prior has rate 1e-4 and shape 1e-4, which tilts the optimum by O(1/n)
    CHECK(std::abs(g - 1) < 5e-3);
  }
}

TEST_CASE("theta update") {
  CHECK(update_theta(Eigen::VectorXd::Zero(8), 1, 8) == 1e-8);
  CHECK(update_theta(Eigen::VectorXd::Ones(8), 1, 8) == doctest::Approx(8.0 / 15.0).epsilon(1e-15));
  Eigen::VectorXd two = Eigen::VectorXd::Zero(8);
  two(0) = two(3) = 1;
  CHECK(update_theta(two, 1, 8) == doctest::Approx(2.0 / 15.0).epsilon(1e-15));
  CHECK_THROWS_AS(update_theta(Eigen::VectorXd::Zero(0), 0.5, 0.5), DomainError);

  // bisection on the derivative of the theta terms
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd p_hat(10);
    for (Eigen::Index j = 0; j < 10; ++j) p_hat(j) = u(rng);
    const double a = 1, b = 10, s = p_hat.sum(), p = 10;
    auto slope = [&](long double th) { return (s + a - 1) / th - (p - s + b - 1) / (1 - th); };
    long double lo = 1e-12L, hi = 1 - 1e-12L;
    for (int it = 0; it < 200; ++it) {
      const long double mid = (lo + hi) / 2;
      (slope(mid) > 0 ? lo : hi) = mid;
    }
    CHECK(std::abs(update_theta(p_hat, a, b) - static_cast<double>(lo)) < 1e-8);
  }
}

TEST_CASE("fit") {
  SUBCASE("null model") {
    int small = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Dataset d = mixhat_data(200, Eigen::VectorXd::Zero(1), 2, 3, 1, 300 + seed);
      const FitResult f = fit(d, Hyperparams::defaults(1, 10, 1));
      small += f.inclusion_probs(0) < 0.5;
      CHECK(std::abs(f.params.beta(0)) < 0.2);
    }
    CHECK(small >= 4);
  }
  SUBCASE("trace ascends, result deterministic and sparse") {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(8);
    beta(0) = 2;
    beta(2) = 1;
    const Dataset d = mixhat_data(100, beta, 2, 3, 2, 5);
    const Hyperparams h = Hyperparams::defaults(8);
    const FitResult f = fit(d, h);
    CHECK(f.converged);
    for (std::size_t k = 1; k < f.objective_trace.size(); ++k) {
      const double prev = f.objective_trace[k - 1];
      CHECK(f.objective_trace[k] >= prev - 1e-8 * std::abs(prev));
    }
    CHECK(f.final_marginal_log_posterior == f.objective_trace.back());
    CHECK(f.final_marginal_log_posterior == doctest::Approx(log_marginal_posterior(d, f.params, h)).epsilon(1e-14));
    CHECK((f.inclusion_probs.array() >= 0).all());
    CHECK((f.inclusion_probs.array() <= 1).all());
    int zeros = 0;
    for (Eigen::Index j = 0; j < 8; ++j) zeros += f.params.beta(j) == 0.0;
    CHECK(zeros >= 3);
    CHECK((f.params.beta - beta).squaredNorm() / 8 < 0.03);

    const FitResult g = fit(d, h);
    CHECK(g.params.flatten() == f.params.flatten());
    CHECK(g.objective_trace == f.objective_trace);
  }
  SUBCASE("bad inputs") {
    const Dataset d = mixhat_data(20, Eigen::VectorXd::Zero(2), 0, 3, 1, 1);
    RegressionParams init = default_init(d);
    init.beta = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(fit(d, Hyperparams::defaults(2), {}, init), InputError);
    EMConfig cfg;
    cfg.convergence_tol = 0;
    CHECK_THROWS_AS(fit(d, Hyperparams::defaults(2), cfg), DomainError);
  }
}

TEST_CASE("default initialization") {
  Eigen::VectorXd y(5);
  y << 4, -1, 100, 2, 3;
  const Dataset d(Eigen::MatrixXd::Ones(5, 2), y);
  const RegressionParams q = default_init(d);
  CHECK(q.beta0 == 3);
  CHECK(q.beta == Eigen::VectorXd::Zero(2));
  CHECK(q.nu == 5);
  CHECK(q.gamma == 1);
  CHECK(q.theta == 0.5);
}
