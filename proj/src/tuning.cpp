#include "tdvs/tuning.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "tdvs/errors.hpp"
#include "tdvs/parallel.hpp"

namespace tdvs {

double predict_point(const FitResult& fit, const Eigen::VectorXd& x) {
  if (x.size() != fit.params.beta.size()) {
    throw InputError(InputErrorCode::kDimension, "prediction point has wrong length");
  }
  return fit.params.beta0 + x.dot(fit.params.beta);
}

std::vector<int> assign_folds(Eigen::Index n, int folds, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(derive_seed(seed, {0x666f6c64ULL}));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> label(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < order.size(); ++k) {
    label[static_cast<std::size_t>(order[k])] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }
  return label;
}

TuningResult cv_tune_t0(const Dataset& data, const TuningGrid& grid, const Hyperparams& hyper_base,
                        const EMConfig& em_config, std::size_t threads) {
  if (grid.t0_candidates.empty()) throw DomainError("tuning grid is empty");
  if (grid.folds < 2 || grid.folds > data.n()) {
    throw DomainError("folds must lie in [2, n]");
  }
  std::vector<double> candidates = grid.t0_candidates;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const std::vector<int> label = assign_folds(data.n(), grid.folds, grid.seed);
  std::vector<Dataset> train;
  std::vector<std::vector<Eigen::Index>> held_out(static_cast<std::size_t>(grid.folds));
  for (int f = 0; f < grid.folds; ++f) {
    std::vector<Eigen::Index> in;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      (label[static_cast<std::size_t>(i)] == f ? held_out[static_cast<std::size_t>(f)] : in)
          .push_back(i);
    }
    train.push_back(data.rows(in));
  }

  const std::size_t folds = static_cast<std::size_t>(grid.folds);
  std::vector<std::optional<double>> fold_mse(candidates.size() * folds);
  parallel_for(fold_mse.size(), threads, [&](std::size_t task) {
    const std::size_t c = task / folds;
    const std::size_t f = task % folds;
    Hyperparams hyper = hyper_base;
    hyper.t0 = candidates[c];
    hyper.t1 = grid.t1_fixed;
    try {
      const FitResult fitted = fit(train[f], hyper, em_config);
      double sse = 0.0;
      for (Eigen::Index i : held_out[f]) {
        const double err = data.response()(i) - predict_point(fitted, data.covariates().row(i).transpose());
        sse += err * err;
      }
      fold_mse[task] = sse / static_cast<double>(held_out[f].size());
    } catch (const NumericalError&) {
      fold_mse[task] = std::nullopt;
    }
  });

  TuningResult result;
  std::optional<double> best;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    CandidateScore score{candidates[c], std::nullopt};
    double total = 0.0;
    bool valid = true;
    for (std::size_t f = 0; f < folds; ++f) {
      const auto& mse = fold_mse[c * folds + f];
      if (!mse) {
        valid = false;
        break;
      }
      total += *mse;
    }
    if (valid) {
      score.pmse = total / static_cast<double>(folds);
      if (!best || *score.pmse < *best) {
        best = score.pmse;
        result.chosen_t0 = candidates[c];
      }
    }
    result.table.push_back(score);
  }
  if (!best) throw NumericalError("every tuning candidate failed", 0);
  return result;
}

}  // namespace tdvs
