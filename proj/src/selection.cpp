#include "tdvs/selection.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "tdvs/cis.hpp"
#include "tdvs/errors.hpp"
#include "tdvs/parallel.hpp"

namespace tdvs {

Prescreen parse_prescreen(const std::string& text) {
  if (text == "auto") return Prescreen::kAuto;
  if (text == "on") return Prescreen::kOn;
  if (text == "off") return Prescreen::kOff;
  throw InputError(InputErrorCode::kInvalidArgument, "prescreen must be auto, on or off");
}

std::string to_string(Prescreen mode) {
  switch (mode) {
    case Prescreen::kAuto: return "auto";
    case Prescreen::kOn: return "on";
    case Prescreen::kOff: return "off";
  }
  return "auto";
}

void SelectionConfig::validate() const {
  if (final_permutations < 1 || group_permutations < 1 || individual_permutations < 1) {
    throw DomainError("permutation counts must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0) || !(alpha0 > 0.0 && alpha0 < 1.0)) {
    throw DomainError("alpha and alpha0 must lie in (0, 1)");
  }
  if (alpha0 < alpha) throw DomainError("alpha0 must be at least alpha");
  if (group_size < 1) throw DomainError("group size must be positive");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
}

bool SelectionConfig::prescreen_enabled(Eigen::Index n, Eigen::Index p) const {
  switch (prescreen) {
    case Prescreen::kOn: return true;
    case Prescreen::kOff: return false;
    case Prescreen::kAuto: return p > n;
  }
  return false;
}

double permutation_p_value(double observed, const std::vector<double>& permuted) {
  if (permuted.empty()) return 1.0;
  const auto exceed = std::count_if(permuted.begin(), permuted.end(),
                                    [observed](double s) { return s >= observed; });
  return static_cast<double>(exceed) / static_cast<double>(permuted.size());
}

namespace {

struct PermutationOutcome {
  double statistic = 0.0;
  bool ok = false;
};

PermutationOutcome permuted_statistic(const Dataset& data, const Hyperparams& hyper,
                                      const EMConfig& em_config, const FitResult& full_fit,
                                      const std::vector<Eigen::Index>& target, double delta,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.n()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  const Eigen::MatrixXd& X = data.covariates();
  Eigen::MatrixXd permuted = X;
  for (Eigen::Index j : target) {
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      permuted(i, j) = X(order[static_cast<std::size_t>(i)], j);
    }
  }
  const Dataset shuffled = data.with_covariates(std::move(permuted));

  RegressionParams warm = full_fit.params;
  for (Eigen::Index j : target) warm.beta(j) = 0.0;
  try {
    const FitResult refit = fit(shuffled, hyper, em_config, warm);
    if (!refit.converged) return {};
    return {cis_group_statistic(shuffled, refit, target, delta), true};
  } catch (const NumericalError&) {
    return {};
  }
}

}  // namespace

std::vector<CiSResult> run_permutation_tests(const Dataset& data, const Hyperparams& hyper,
                                             const EMConfig& em_config, const FitResult& full_fit,
                                             const std::vector<std::vector<Eigen::Index>>& targets,
                                             const std::vector<std::uint64_t>& target_keys,
                                             int count, double delta, std::uint64_t master_seed,
                                             Stage stage, std::size_t threads) {
  if (targets.size() != target_keys.size()) {
    throw std::invalid_argument("one key per permutation target is required");
  }
  if (count < 1) throw DomainError("permutation count must be positive");
  const auto per_target = static_cast<std::size_t>(count);

  std::vector<CiSResult> results(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    results[t].target = targets[t];
    results[t].statistic = cis_group_statistic(data, full_fit, targets[t], delta);
  }

  std::vector<PermutationOutcome> outcomes(targets.size() * per_target);
  parallel_for(outcomes.size(), threads, [&](std::size_t task) {
    const std::size_t t = task / per_target;
    const std::size_t b = task % per_target;
    const std::uint64_t seed =
        derive_seed(master_seed, {static_cast<std::uint64_t>(stage), target_keys[t], b});
    outcomes[task] = permuted_statistic(data, hyper, em_config, full_fit, targets[t], delta, seed);
  });

  for (std::size_t t = 0; t < targets.size(); ++t) {
    CiSResult& r = results[t];
    for (std::size_t b = 0; b < per_target; ++b) {
      const PermutationOutcome& o = outcomes[t * per_target + b];
      if (o.ok) {
        r.permuted_statistics.push_back(o.statistic);
      } else {
        ++r.failed_permutations;
      }
    }
    r.p_value = permutation_p_value(r.statistic, r.permuted_statistics);
    r.unreliable = r.failed_permutations * 10 > count;
  }
  return results;
}

CiSResult permutation_pvalue(const Dataset& data, const Hyperparams& hyper,
                             const EMConfig& em_config, const FitResult& full_fit,
                             const std::vector<Eigen::Index>& target, int count, double delta,
                             std::uint64_t master_seed, Stage stage, std::size_t threads) {
  const auto key = static_cast<std::uint64_t>(target.empty() ? 0 : target.front());
  return run_permutation_tests(data, hyper, em_config, full_fit, {target}, {key}, count, delta,
                               master_seed, stage, threads)
      .front();
}

std::vector<std::vector<Eigen::Index>> partition_groups(Eigen::Index p, int group_size,
                                                        std::uint64_t master_seed) {
  if (p < 1 || group_size < 1) throw DomainError("partition needs p >= 1 and group size >= 1");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(derive_seed(master_seed, {static_cast<std::uint64_t>(Stage::kPartition)}));
  std::shuffle(order.begin(), order.end(), rng);

  const auto m = static_cast<std::size_t>(group_size);
  std::vector<std::vector<Eigen::Index>> groups;
  for (std::size_t start = 0; start < order.size(); start += m) {
    const std::size_t end = std::min(start + m, order.size());
    std::vector<Eigen::Index> g(order.begin() + static_cast<std::ptrdiff_t>(start),
                                order.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(g.begin(), g.end());
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<Eigen::Index> prescreen_groups(const Dataset& data, const Hyperparams& hyper,
                                           const EMConfig& em_config,
                                           const SelectionConfig& sel_config,
                                           const FitResult& full_fit, StageTrace* trace,
                                           std::size_t threads) {
  auto groups = partition_groups(data.p(), sel_config.group_size, sel_config.master_seed);
  std::vector<std::uint64_t> keys(groups.size());
  std::iota(keys.begin(), keys.end(), std::uint64_t{0});
  auto tests = run_permutation_tests(data, hyper, em_config, full_fit, groups, keys,
                                     sel_config.group_permutations, sel_config.delta,
                                     sel_config.master_seed, Stage::kGroup, threads);

  std::vector<Eigen::Index> survivors;
  std::vector<Eigen::Index> dropped;
  for (std::size_t q = 0; q < groups.size(); ++q) {
    auto& sink = tests[q].p_value > sel_config.alpha0 ? dropped : survivors;
    sink.insert(sink.end(), groups[q].begin(), groups[q].end());
  }
  std::sort(survivors.begin(), survivors.end());
  std::sort(dropped.begin(), dropped.end());
  if (trace) {
    trace->groups = std::move(groups);
    trace->group_tests = std::move(tests);
    trace->dropped_at_group_stage = dropped;
  }
  return survivors;
}

namespace {

std::vector<CiSResult> individual_tests(const Dataset& data, const Hyperparams& hyper,
                                        const EMConfig& em_config, const FitResult& full_fit,
                                        const std::vector<Eigen::Index>& candidates, int count,
                                        double delta, std::uint64_t master_seed, Stage stage,
                                        std::size_t threads) {
  std::vector<std::vector<Eigen::Index>> targets;
  std::vector<std::uint64_t> keys;
  for (Eigen::Index j : candidates) {
    targets.push_back({j});
    keys.push_back(static_cast<std::uint64_t>(j));
  }
  return run_permutation_tests(data, hyper, em_config, full_fit, targets, keys, count, delta,
                               master_seed, stage, threads);
}

}  // namespace

std::vector<Eigen::Index> prescreen_individuals(const Dataset& data, const Hyperparams& hyper,
                                                const EMConfig& em_config,
                                                const SelectionConfig& sel_config,
                                                const FitResult& full_fit,
                                                const std::vector<Eigen::Index>& survivors,
                                                StageTrace* trace, std::size_t threads) {
  auto tests = individual_tests(data, hyper, em_config, full_fit, survivors,
                                sel_config.individual_permutations, sel_config.delta,
                                sel_config.master_seed, Stage::kIndividual, threads);
  std::vector<Eigen::Index> kept;
  std::vector<Eigen::Index> dropped;
  for (std::size_t k = 0; k < survivors.size(); ++k) {
    (tests[k].p_value > sel_config.alpha0 ? dropped : kept).push_back(survivors[k]);
  }
  if (trace) {
    trace->individual_tests = std::move(tests);
    trace->dropped_at_individual_stage = dropped;
  }
  return kept;
}

SelectionResult tdvs_select(const Dataset& data, const Hyperparams& hyper,
                            const EMConfig& em_config, const SelectionConfig& sel_config,
                            std::size_t threads) {
  sel_config.validate();
  SelectionResult result;
  result.fit = fit(data, hyper, em_config);
  result.prescreen_used = sel_config.prescreen_enabled(data.n(), data.p());

  std::vector<Eigen::Index> candidates(static_cast<std::size_t>(data.p()));
  std::iota(candidates.begin(), candidates.end(), Eigen::Index{0});
  if (result.prescreen_used) {
    candidates = prescreen_groups(data, hyper, em_config, sel_config, result.fit, &result.trace,
                                  threads);
    if (!candidates.empty()) {
      candidates = prescreen_individuals(data, hyper, em_config, sel_config, result.fit,
                                         candidates, &result.trace, threads);
    }
  }
  if (!candidates.empty()) {
    result.trace.final_tests = individual_tests(
        data, hyper, em_config, result.fit, candidates, sel_config.final_permutations,
        sel_config.delta, sel_config.master_seed, Stage::kFinal, threads);
  }
  for (const CiSResult& test : result.trace.final_tests) {
    if (test.p_value < sel_config.alpha) result.selected.push_back(test.target.front());
  }
  return result;
}

}  // namespace tdvs
