#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tdvs/errors.hpp"
#include "tdvs/simulation.hpp"

using namespace tdvs;

namespace {

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd x = a.array() - a.mean();
  const Eigen::ArrayXd y = b.array() - b.mean();
  return (x * y).sum() / std::sqrt((x * x).sum() * (y * y).sum());
}

double variance(const Eigen::VectorXd& a) {
  return (a.array() - a.mean()).square().sum() / static_cast<double>(a.size() - 1);
}

}  // namespace

TEST_CASE("presets") {
  const SimScenario t1 = SimScenario::preset("table1-mixhat");
  CHECK(t1.n == 100);
  CHECK(t1.p == 8);
  CHECK(t1.beta0_true == 2);
  CHECK(t1.beta_true(0) == 2);
  CHECK(t1.beta_true(2) == 1);
  CHECK(t1.beta_true.cwiseAbs().sum() == 3);
  CHECK(t1.errors.kind == ErrorLaw::Kind::kMixHat);
  CHECK(SimScenario::preset("table2-normal").covariates == CovariateDesign::kBlock);
  const SimScenario t3 = SimScenario::preset("table3-mixture");
  CHECK(t3.p == 80);
  CHECK(t3.n == 30);
  CHECK(SimScenario::preset_names().size() == 9);
  CHECK_THROWS_AS(SimScenario::preset("table4-mixhat"), InputError);
}

TEST_CASE("error law parsing") {
  const ErrorLaw m = ErrorLaw::parse("mixture:0.8,0,3,0.2,5,7");
  CHECK(m.weights == std::vector<double>{0.8, 0.2});
  CHECK(m.variances == std::vector<double>{3, 7});
  CHECK(ErrorLaw::parse(m.describe()).means == m.means);
  CHECK_THROWS_AS(ErrorLaw::parse("mixture:0.5,0,1,0.2,1,1"), DomainError);
  CHECK_THROWS_AS(ErrorLaw::parse("cauchy:1"), InputError);
  CHECK_THROWS_AS(ErrorLaw::parse("normal:0,x"), InputError);
}

TEST_CASE("covariate designs") {
  SimScenario s;
  s.n = 10000;
  s.p = 6;
  s.beta_true = default_beta(6);
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd X = gen_covariates(s, rng);
  for (Eigen::Index j = 0; j < 6; ++j) CHECK(std::abs(variance(X.col(j)) - 1) < 0.05);

  s.covariates = CovariateDesign::kBlock;
  s.p = 5;
  CHECK(s.has_unpaired_column());
  std::mt19937_64 rng2(2);
  const Eigen::MatrixXd B = gen_covariates(s, rng2);
  const double tol = 3 / std::sqrt(10000.0);
  for (Eigen::Index a = 0; a < 5; ++a) {
    for (Eigen::Index b = a + 1; b < 5; ++b) {
      const double expected = (a % 2 == 0 && b == a + 1) ? 0.5 : 0.0;
      CHECK(std::abs(correlation(B.col(a), B.col(b)) - expected) < tol);
    }
    CHECK(std::abs(variance(B.col(a)) - 1) < 0.05);
  }

  std::mt19937_64 r1(5), r2(5);
  CHECK(gen_covariates(s, r1) == gen_covariates(s, r2));
}

TEST_CASE("error generators") {
  SimScenario s;
  s.n = 100000;
  s.errors = ErrorLaw::mixhat(3, 2);
  std::mt19937_64 rng(3);
  const Eigen::VectorXd e = gen_errors(s, rng);
  CHECK(std::abs((e.array() > 0).cast<double>().mean() - 0.8) < 0.01);

  s.errors = ErrorLaw::gaussian(0, 3);
  const Eigen::VectorXd g = gen_errors(s, rng);
  CHECK(std::abs(variance(g) - 3) < 0.06);

  s.errors = ErrorLaw::mixture({0.8, 0.2}, {0, 5}, {3, 7});
  const Eigen::VectorXd m = gen_errors(s, rng);
  CHECK(std::abs(m.mean() - 1.0) < 0.05);
  CHECK(std::abs(variance(m) - (0.8 * 3 + 0.2 * 7 + 0.8 * 0.2 * 25)) < 0.2);
  // Gaussian-kernel density maximized over a grid
  std::vector<double> draws(m.data(), m.data() + m.size());
  std::sort(draws.begin(), draws.end());
  const double bw = 0.3;
  double best_x = 0, best = -1;
  for (double x = -3; x <= 8; x += 0.02) {
    const auto lo = std::lower_bound(draws.begin(), draws.end(), x - 6 * bw);
    const auto hi = std::upper_bound(draws.begin(), draws.end(), x + 6 * bw);
    double dens = 0;
    for (auto it = lo; it != hi; ++it) dens += std::exp(-0.5 * ((*it - x) / bw) * ((*it - x) / bw));
    if (dens > best) {
      best = dens;
      best_x = x;
    }
  }
  CHECK(std::abs(best_x) <= 0.5);
}

TEST_CASE("mixture excess kurtosis under both readings") {
  // moments of a two-component normal mixture from the component moments
  auto excess = [](double v0, double v1) {
    const double w[] = {0.8, 0.2}, mu[] = {0, 5}, var[] = {v0, v1};
    const double mean = w[0] * mu[0] + w[1] * mu[1];
    double m2 = 0, m4 = 0;
    for (int k = 0; k < 2; ++k) {
      const double d = mu[k] - mean;
      m2 += w[k] * (d * d + var[k]);
      m4 += w[k] * (d * d * d * d + 6 * d * d * var[k] + 3 * var[k] * var[k]);
    }
    return m4 / (m2 * m2) - 3;
  };
  CHECK(excess(3, 7) == doctest::Approx(1.1387).epsilon(1e-3));
  CHECK(excess(9, 49) == doctest::Approx(3.0567).epsilon(1e-3));
}

TEST_CASE("response") {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 3);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(5);
  CHECK(gen_response(X, zero, 2, Eigen::VectorXd::Zero(3)) == Eigen::VectorXd::Constant(5, 2));
  Eigen::VectorXd beta(3);
  beta << 1, -2, 0.5;
  const Eigen::VectorXd e = Eigen::VectorXd::LinSpaced(5, -1, 1);
  const Eigen::VectorXd y1 = gen_response(X, e, 2, beta);
  const Eigen::VectorXd y2 = gen_response(X, e, 2, 2 * beta);
  CHECK(((y2.array() - 2 - e.array()) - 2 * (y1.array() - 2 - e.array())).abs().maxCoeff() < 1e-14);
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(y1(i) == doctest::Approx(2 + X(i, 0) - 2 * X(i, 1) + 0.5 * X(i, 2) + e(i)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(gen_response(X, e, 2, Eigen::VectorXd::Zero(2)), InputError);
}

TEST_CASE("metrics") {
  const Eigen::VectorXd truth = default_beta(8);
  const Metrics exact = compute_metrics({0, 2}, truth, truth);
  CHECK(*exact.tpr == 1);
  CHECK(*exact.fpr == 0);
  CHECK(exact.acr == 1);
  CHECK(exact.mse == 0);
  const Metrics all = compute_metrics({0, 1, 2, 3, 4, 5, 6, 7}, truth, truth);
  CHECK(*all.tpr == 1);
  CHECK(*all.fpr == 1);
  CHECK(all.acr == 0.25);
  const Metrics none = compute_metrics({}, Eigen::VectorXd::Zero(8), Eigen::VectorXd::Zero(8));
  CHECK_FALSE(none.tpr.has_value());
  CHECK(*none.fpr == 0);
  Eigen::VectorXd hat = truth;
  hat(1) = 0.4;
  CHECK(compute_metrics({0}, hat, truth).mse == doctest::Approx(0.16 / 8));
  const Metrics half = compute_metrics({0, 5}, truth, truth);
  CHECK(half.acr == doctest::Approx((1.0 + 5.0) / 8));
}

TEST_CASE("summaries") {
  const MetricSummary one = summarize({0.4});
  CHECK(*one.mean == 0.4);
  CHECK_FALSE(one.se.has_value());
  const MetricSummary s = summarize({1, 2, 3, 4});
  CHECK(*s.mean == 2.5);
  CHECK(*s.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2));
  CHECK_FALSE(summarize({}).mean.has_value());
}

TEST_CASE("study runner") {
  SimScenario s = SimScenario::preset("table1-mixhat");
  s.replicates = 3;
  s.seed = 11;
  MethodConfig m;
  m.selection.final_permutations = 20;
  m.lasso_baseline = true;
  const StudyResult a = run_study(s, m, 1);
  const StudyResult b = run_study(s, m, 3);
  CHECK(a.completed == 3);
  CHECK(a.failed == 0);
  CHECK(*a.tdvs.tpr.mean == *b.tdvs.tpr.mean);
  CHECK(*a.tdvs.mse.mean == *b.tdvs.mse.mean);
  REQUIRE(a.lasso.has_value());
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(a.replicates[r].selected == b.replicates[r].selected);
    CHECK(a.replicates[r].beta_hat == b.replicates[r].beta_hat);
    CHECK(a.replicates[r].tdvs.acr >= 0);
    CHECK(a.replicates[r].tdvs.acr <= 1);
  }
  // replicate data depends only on (seed, r)
  const ReplicateOutcome solo = run_replicate(s, m, 2);
  CHECK(solo.beta_hat == a.replicates[2].beta_hat);

  s.replicates = 1;
  const StudyResult single = run_study(s, m, 1);
  CHECK_FALSE(single.tdvs.tpr.se.has_value());
}
