#pragma once

#include <Eigen/Dense>
#include <span>

#include "tdvs/em.hpp"
#include "tdvs/model.hpp"

namespace tdvs {

/// Change-in-slope statistic for covariate j (0-based):
///   (1/n) sum_i |p'(e_i)^2 - p'(e_{i,-j})^2| / (|p''(e_{i,-j})| + delta)
/// where e_i are the fitted residuals, e_{i,-j} the residuals with x_ij set
/// to zero, and p', p'' the fitted MixHat density derivatives.
double cis_statistic(const Dataset& data, const FitResult& fit, Eigen::Index j, double delta);

/// Same statistic with every column of `group` zeroed at once.
double cis_group_statistic(const Dataset& data, const FitResult& fit,
                           std::span<const Eigen::Index> group, double delta);

}  // namespace tdvs
