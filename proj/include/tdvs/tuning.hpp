#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "tdvs/em.hpp"
#include "tdvs/model.hpp"

namespace tdvs {

struct TuningGrid {
  std::vector<double> t0_candidates{1.0, 3.0, 10.0, 30.0, 100.0};
  double t1_fixed = 1.0;
  int folds = 5;
  std::uint64_t seed = 0;
};

struct CandidateScore {
  double t0 = 0.0;
  std::optional<double> pmse;  // empty when a fold fit failed
};

struct TuningResult {
  double chosen_t0 = 0.0;
  std::vector<CandidateScore> table;  // ascending t0
};

/// Mode-point prediction beta0 + x' beta.
double predict_point(const FitResult& fit, const Eigen::VectorXd& x);

/// Fold label per observation: a seeded shuffle dealt round-robin into `folds` groups.
std::vector<int> assign_folds(Eigen::Index n, int folds, std::uint64_t seed);

/// Picks t0 minimizing the fold-averaged held-out squared prediction error,
/// with t1 fixed. Ties go to the smaller t0.
TuningResult cv_tune_t0(const Dataset& data, const TuningGrid& grid, const Hyperparams& hyper_base,
                        const EMConfig& em_config, std::size_t threads = 1);

}  // namespace tdvs
