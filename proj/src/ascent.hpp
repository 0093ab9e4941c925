#pragma once

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <limits>

namespace tdvs::detail {

struct Slope {
  double d1;
  double d2 = std::numeric_limits<double>::quiet_NaN();
};

/// Local maximizer of a 1-D function on [lower, upper], reached by walking
/// uphill from `start`. The derivative sign is bracketed (+ on the near side,
/// - on the far side) by geometric expansion, then the sign change is located
/// with TOMS 748. A + to - sign change is always a local maximum, so
/// non-concave functions are handled. Hitting a bound returns the bound.
/// `slope(t, curvature)` may skip d2 when `curvature` is false; only the
/// starting point needs it, to size the first step.
template <class SlopeFn>
double ascend_1d(SlopeFn&& slope, double start, double lower, double upper, double fallback_step,
                 int max_expansions) {
  const Slope s0 = slope(start, true);
  if (s0.d1 == 0.0 || !std::isfinite(s0.d1)) return start;
  const double dir = s0.d1 > 0.0 ? 1.0 : -1.0;
  const double bound = dir > 0.0 ? upper : lower;
  if (start == bound) return start;

  double step = fallback_step;
  if (std::isfinite(s0.d2) && s0.d2 < 0.0) step = 1.5 * std::abs(s0.d1 / s0.d2);
  step = std::max(step, 1e-12 * (1.0 + std::abs(start)));

  double near = start;
  double near_d1 = s0.d1;
  double far = 0.0;
  double far_d1 = 0.0;
  for (int k = 0;; ++k) {
    far = dir > 0.0 ? std::min(near + step, upper) : std::max(near - step, lower);
    far_d1 = slope(far, false).d1;
    if (!std::isfinite(far_d1)) return near;
    if (far_d1 * dir <= 0.0) break;
    if (far == bound || k >= max_expansions) return far;
    near = far;
    near_d1 = far_d1;
    step *= 2.0;
  }
  if (far_d1 == 0.0) return far;

  double a = near, fa = near_d1, b = far, fb = far_d1;
  if (a > b) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  auto tol = [](double x, double y) {
    return std::abs(x - y) <= 4e-14 * (1.0 + std::max(std::abs(x), std::abs(y)));
  };
  std::uintmax_t iters = 100;
  const auto root = boost::math::tools::toms748_solve(
      [&](double t) { return slope(t, false).d1; }, a, b, fa, fb, tol, iters);
  return 0.5 * (root.first + root.second);
}

}  // namespace tdvs::detail
