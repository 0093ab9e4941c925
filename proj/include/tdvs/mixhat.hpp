#pragma once

#include <cstddef>
#include <random>
#include <vector>

namespace tdvs {

/// Shape pair of the mixture-of-half-t error law. The right half of a
/// Student's t_nu density is stretched by gamma and the left half shrunk by
/// 1/gamma, so the mode stays at zero and P(eps > 0) = gamma^2 / (1 + gamma^2).
class MixHatParams {
 public:
  MixHatParams(double nu, double gamma);

  double nu() const { return nu_; }
  double gamma() const { return gamma_; }

  /// log(2 / (gamma + 1/gamma)), shared by both halves.
  double log_mixing_constant() const { return log_c_; }

 private:
  double nu_;
  double gamma_;
  double log_c_;
};

/// Log density of Student's t with `nu` degrees of freedom.
double student_t_logpdf(double u, double nu);

double mixhat_pdf(double eps, const MixHatParams& params);
double mixhat_logpdf(double eps, const MixHatParams& params);

/// First and second derivatives of the density in eps. At eps == 0 the
/// right branch (eps >= 0) is used; the second derivative jumps there
/// whenever gamma != 1.
double mixhat_d1(double eps, const MixHatParams& params);
double mixhat_d2(double eps, const MixHatParams& params);

/// Draws `count` values. Each draw is +gamma|T| with probability
/// gamma^2/(1+gamma^2) and -|T|/gamma otherwise, where T ~ t_nu.
std::vector<double> mixhat_sample(const MixHatParams& params, std::size_t count,
                                  std::mt19937_64& rng);

/// Precomputed log-density pieces for evaluating many residuals at a fixed
/// (nu, gamma). The kernel drops the additive constant `log_norm`.
struct MixHatKernel {
  explicit MixHatKernel(const MixHatParams& params);

  double nu;
  double half_nu_plus_one;  // (nu + 1) / 2
  double right_scale_sq;    // 1 / gamma^2
  double left_scale_sq;     // gamma^2
  double log_norm;          // log C + log Gamma((nu+1)/2) - log Gamma(nu/2) - log(nu pi)/2

  double scale_sq(double eps) const { return eps >= 0.0 ? right_scale_sq : left_scale_sq; }

  /// -(nu+1)/2 * log(1 + s^2 eps^2 / nu)
  double log_kernel(double eps) const;

  double logpdf(double eps) const { return log_norm + log_kernel(eps); }

  /// d/deps of the log density.
  double score(double eps) const {
    const double s2 = scale_sq(eps);
    return -2.0 * half_nu_plus_one * s2 * eps / (nu + s2 * eps * eps);
  }

  /// d^2/deps^2 of the log density.
  double score_slope(double eps) const {
    const double s2 = scale_sq(eps);
    const double q = s2 * eps * eps;
    const double denom = nu + q;
    return -2.0 * half_nu_plus_one * s2 * (nu - q) / (denom * denom);
  }
};

}  // namespace tdvs
