#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "tdvs/em.hpp"
#include "tdvs/model.hpp"

namespace tdvs {

enum class Prescreen { kAuto, kOn, kOff };

Prescreen parse_prescreen(const std::string& text);
std::string to_string(Prescreen mode);

struct SelectionConfig {
  int final_permutations = 200;      // B
  int group_permutations = 20;       // B1
  int individual_permutations = 20;  // B2
  double alpha = 0.05;
  double alpha0 = 6.0 / 20.0;
  int group_size = 4;
  double delta = 1e-3;
  Prescreen prescreen = Prescreen::kAuto;  // auto: on iff p > n
  std::uint64_t master_seed = 0;

  void validate() const;
  bool prescreen_enabled(Eigen::Index n, Eigen::Index p) const;
};

/// Outcome of one permutation test. `permuted_statistics` holds the
/// statistics of the refits that succeeded; failed refits are excluded from
/// the p-value denominator.
struct CiSResult {
  std::vector<Eigen::Index> target;
  double statistic = 0.0;
  std::vector<double> permuted_statistics;
  double p_value = 1.0;
  int failed_permutations = 0;
  bool unreliable = false;  // more than 10% of refits failed
};

struct StageTrace {
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<CiSResult> group_tests;
  std::vector<Eigen::Index> dropped_at_group_stage;
  std::vector<CiSResult> individual_tests;
  std::vector<Eigen::Index> dropped_at_individual_stage;
  std::vector<CiSResult> final_tests;
};

struct SelectionResult {
  std::vector<Eigen::Index> selected;
  bool prescreen_used = false;
  StageTrace trace;
  FitResult fit;
};

/// Stage identifiers mixed into child seeds.
enum class Stage : std::uint64_t { kPartition = 1, kGroup = 2, kIndividual = 3, kFinal = 4 };

/// count(permuted >= observed) / number of permutations.
double permutation_p_value(double observed, const std::vector<double>& permuted);

/// Permutation tests for several targets at once. For each target and each
/// of `count` permutations, the rows of the target columns are shuffled
/// jointly, the model is refit (warm-started from `full_fit` with the target
/// coefficients reset to zero), and the statistic is recomputed on the
/// permuted data with its own fit. Permutation b of target t draws from
/// derive_seed(master_seed, {stage, key_t, b}), so results do not depend on
/// `threads`.
std::vector<CiSResult> run_permutation_tests(const Dataset& data, const Hyperparams& hyper,
                                             const EMConfig& em_config, const FitResult& full_fit,
                                             const std::vector<std::vector<Eigen::Index>>& targets,
                                             const std::vector<std::uint64_t>& target_keys,
                                             int count, double delta, std::uint64_t master_seed,
                                             Stage stage, std::size_t threads = 1);

CiSResult permutation_pvalue(const Dataset& data, const Hyperparams& hyper,
                             const EMConfig& em_config, const FitResult& full_fit,
                             const std::vector<Eigen::Index>& target, int count, double delta,
                             std::uint64_t master_seed, Stage stage = Stage::kFinal,
                             std::size_t threads = 1);

/// Seeded uniform partition into ceil(p / m) groups; the last one takes the remainder.
std::vector<std::vector<Eigen::Index>> partition_groups(Eigen::Index p, int group_size,
                                                        std::uint64_t master_seed);

/// Group-level screen. Drops each group whose p-value exceeds alpha0 and
/// returns the sorted union of the surviving groups.
std::vector<Eigen::Index> prescreen_groups(const Dataset& data, const Hyperparams& hyper,
                                           const EMConfig& em_config,
                                           const SelectionConfig& sel_config,
                                           const FitResult& full_fit, StageTrace* trace = nullptr,
                                           std::size_t threads = 1);

/// Individual-level screen over `survivors` at level alpha0.
std::vector<Eigen::Index> prescreen_individuals(const Dataset& data, const Hyperparams& hyper,
                                                const EMConfig& em_config,
                                                const SelectionConfig& sel_config,
                                                const FitResult& full_fit,
                                                const std::vector<Eigen::Index>& survivors,
                                                StageTrace* trace = nullptr,
                                                std::size_t threads = 1);

/// Full pipeline: fit, optional group and individual screens, then final
/// tests with B permutations; covariates with p-value < alpha are selected.
SelectionResult tdvs_select(const Dataset& data, const Hyperparams& hyper,
                            const EMConfig& em_config, const SelectionConfig& sel_config,
                            std::size_t threads = 1);

}  // namespace tdvs
