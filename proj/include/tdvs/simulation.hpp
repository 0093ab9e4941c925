#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tdvs/em.hpp"
#include "tdvs/selection.hpp"
#include "tdvs/tuning.hpp"

namespace tdvs {

enum class CovariateDesign {
  kIndependent,  // N(0, I_p)
  kBlock,        // block-diagonal, 2x2 blocks 0.5 J + 0.5 I
};

/// Error law of the simulated regression. Gaussian parameters are
/// (mean, variance) throughout.
struct ErrorLaw {
  enum class Kind { kMixHat, kGaussian, kMixture };
  Kind kind = Kind::kMixHat;
  double nu = 3.0;
  double gamma = 2.0;
  std::vector<double> weights{1.0};
  std::vector<double> means{0.0};
  std::vector<double> variances{1.0};

  static ErrorLaw mixhat(double nu, double gamma);
  static ErrorLaw gaussian(double mean, double variance);
  static ErrorLaw mixture(std::vector<double> weights, std::vector<double> means,
                          std::vector<double> variances);
  /// "mixhat:NU,GAMMA", "normal:MEAN,VAR" or "mixture:W,MEAN,VAR[,W,MEAN,VAR...]".
  static ErrorLaw parse(const std::string& text);

  std::string describe() const;
  void validate() const;
};

struct SimScenario {
  std::string name = "custom";
  Eigen::Index n = 100;
  Eigen::Index p = 8;
  double beta0_true = 2.0;
  Eigen::VectorXd beta_true;
  CovariateDesign covariates = CovariateDesign::kIndependent;
  ErrorLaw errors;
  int replicates = 1;
  std::uint64_t seed = 0;

  void validate() const;
  /// Block design with odd p leaves the last column unpaired (drawn independently).
  bool has_unpaired_column() const;

  /// Presets named table{1,2,3}-{mixhat,normal,mixture}: (p, n) = (8, 100)
  /// for tables 1 and 2 (table 2 block-correlated), (80, 30) for table 3;
  /// beta0 = 2, beta_1 = 2, beta_3 = 1, all other effects zero.
  static SimScenario preset(const std::string& name);
  static std::vector<std::string> preset_names();
};

/// beta_1 = 2, beta_3 = 1 (1-based), zeros elsewhere.
Eigen::VectorXd default_beta(Eigen::Index p);

struct Metrics {
  std::optional<double> tpr;  // missing when the true support is empty
  std::optional<double> fpr;  // missing when every effect is non-null
  double acr = 0.0;
  double mse = 0.0;
};

Eigen::MatrixXd gen_covariates(const SimScenario& scenario, std::mt19937_64& rng);
Eigen::VectorXd gen_errors(const SimScenario& scenario, std::mt19937_64& rng);
Eigen::VectorXd gen_response(const Eigen::MatrixXd& X, const Eigen::VectorXd& errors,
                             double beta0_true, const Eigen::VectorXd& beta_true);

Metrics compute_metrics(const std::vector<Eigen::Index>& selected, const Eigen::VectorXd& beta_hat,
                        const Eigen::VectorXd& beta_true);

struct MethodConfig {
  std::optional<double> t0 = 10.0;  // empty: tune by cross-validation
  double t1 = 1.0;
  TuningGrid grid;
  SelectionConfig selection;
  EMConfig em;
  bool lasso_baseline = false;  // also report the t0 = t1 fit, selecting nonzero coefficients
};

struct ReplicateOutcome {
  int replicate = 0;
  bool ok = false;
  std::string error;
  double t0_used = 0.0;
  std::vector<Eigen::Index> selected;
  Eigen::VectorXd beta_hat;
  Metrics tdvs;
  std::optional<Metrics> lasso;
};

struct MetricSummary {
  std::optional<double> mean;
  std::optional<double> se;  // sample sd / sqrt(count); missing below two values
  int count = 0;
};

struct MethodSummary {
  MetricSummary tpr, fpr, acr, mse;
};

struct StudyResult {
  int completed = 0;
  int failed = 0;
  MethodSummary tdvs;
  std::optional<MethodSummary> lasso;
  std::vector<ReplicateOutcome> replicates;
};

/// One replicate: data from derive_seed(seed, {r}), selection seeded from
/// derive_seed(seed, {r, 1}). Runs single-threaded.
ReplicateOutcome run_replicate(const SimScenario& scenario, const MethodConfig& method, int r);

/// Runs every replicate (in parallel over replicates) and aggregates.
StudyResult run_study(const SimScenario& scenario, const MethodConfig& method,
                      std::size_t threads = 1);

MetricSummary summarize(const std::vector<double>& values);

}  // namespace tdvs
