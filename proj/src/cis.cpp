#include "tdvs/cis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tdvs/mixhat.hpp"

namespace tdvs {

namespace {

struct DensitySlopes {
  double d1;
  double d2;
};

DensitySlopes slopes(const MixHatKernel& k, double eps) {
  const double pdf = std::exp(k.logpdf(eps));
  const double s = k.score(eps);
  return {pdf * s, pdf * (k.score_slope(eps) + s * s)};
}

}  // namespace

double cis_group_statistic(const Dataset& data, const FitResult& fit,
                           std::span<const Eigen::Index> group, double delta) {
  if (group.empty()) throw std::invalid_argument("CiS group must be non-empty");
  for (Eigen::Index j : group) {
    if (j < 0 || j >= data.p()) {
      throw std::out_of_range("covariate index " + std::to_string(j) + " out of range");
    }
  }
  const auto& beta = fit.params.beta;
  const Eigen::MatrixXd& X = data.covariates();
  const MixHatKernel k(MixHatParams(fit.params.nu, fit.params.gamma));
  const Eigen::VectorXd full = residuals(data, fit.params.beta0, beta);

  double total = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    double reduced = full(i);
    for (Eigen::Index j : group) reduced += X(i, j) * beta(j);
    if (reduced == full(i)) continue;
    const double with = slopes(k, full(i)).d1;
    const DensitySlopes without = slopes(k, reduced);
    total += std::abs(with * with - without.d1 * without.d1) / (std::abs(without.d2) + delta);
  }
  return total / static_cast<double>(data.n());
}

double cis_statistic(const Dataset& data, const FitResult& fit, Eigen::Index j, double delta) {
  const Eigen::Index group[1] = {j};
  return cis_group_statistic(data, fit, group, delta);
}

}  // namespace tdvs
