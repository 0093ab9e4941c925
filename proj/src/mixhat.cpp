#include "tdvs/mixhat.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "tdvs/errors.hpp"

namespace tdvs {

namespace {

double t_log_norm(double nu) {
  return boost::math::lgamma(0.5 * (nu + 1.0)) - boost::math::lgamma(0.5 * nu) -
         0.5 * std::log(nu * std::numbers::pi);
}

// log(1 + z^2) without overflow for very large |z|.
double log1p_square(double z) {
  const double az = std::abs(z);
  if (az > 1e150) return 2.0 * std::log(az);
  return std::log1p(az * az);
}

}  // namespace

MixHatParams::MixHatParams(double nu, double gamma) : nu_(nu), gamma_(gamma) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("MixHat: nu must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("MixHat: gamma must be positive");
  log_c_ = std::log(2.0) + std::log(gamma) - std::log1p(gamma * gamma);
}

double student_t_logpdf(double u, double nu) {
  if (!(nu > 0.0)) throw DomainError("student_t_logpdf: nu must be positive");
  return t_log_norm(nu) - 0.5 * (nu + 1.0) * log1p_square(u / std::sqrt(nu));
}

MixHatKernel::MixHatKernel(const MixHatParams& params)
    : nu(params.nu()),
      half_nu_plus_one(0.5 * (params.nu() + 1.0)),
      right_scale_sq(1.0 / (params.gamma() * params.gamma())),
      left_scale_sq(params.gamma() * params.gamma()),
      log_norm(params.log_mixing_constant() + t_log_norm(params.nu())) {}

double MixHatKernel::log_kernel(double eps) const {
  const double z = eps * std::sqrt(scale_sq(eps) / nu);
  return -half_nu_plus_one * log1p_square(z);
}

double mixhat_logpdf(double eps, const MixHatParams& params) {
  const double u = eps >= 0.0 ? eps / params.gamma() : eps * params.gamma();
  return params.log_mixing_constant() + student_t_logpdf(u, params.nu());
}

double mixhat_pdf(double eps, const MixHatParams& params) {
  return std::exp(mixhat_logpdf(eps, params));
}

double mixhat_d1(double eps, const MixHatParams& params) {
  const MixHatKernel k(params);
  return std::exp(k.logpdf(eps)) * k.score(eps);
}

double mixhat_d2(double eps, const MixHatParams& params) {
  const MixHatKernel k(params);
  const double s = k.score(eps);
  return std::exp(k.logpdf(eps)) * (k.score_slope(eps) + s * s);
}

std::vector<double> mixhat_sample(const MixHatParams& params, std::size_t count,
                                  std::mt19937_64& rng) {
  const double g = params.gamma();
  std::bernoulli_distribution right_half(g * g / (1.0 + g * g));
  std::student_t_distribution<double> t(params.nu());
  std::vector<double> draws(count);
  for (auto& d : draws) {
    const bool right = right_half(rng);
    const double magnitude = std::abs(t(rng));
    d = right ? g * magnitude : -magnitude / g;
  }
  return draws;
}

}  // namespace tdvs
