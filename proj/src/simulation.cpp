#include "tdvs/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tdvs/errors.hpp"
#include "tdvs/mixhat.hpp"
#include "tdvs/parallel.hpp"

namespace tdvs {

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(InputErrorCode::kInvalidArgument, "bad number '" + item + "'");
    }
  }
  return out;
}

}  // namespace

ErrorLaw ErrorLaw::mixhat(double nu, double gamma) {
  ErrorLaw law;
  law.kind = Kind::kMixHat;
  law.nu = nu;
  law.gamma = gamma;
  return law;
}

ErrorLaw ErrorLaw::gaussian(double mean, double variance) {
  ErrorLaw law;
  law.kind = Kind::kGaussian;
  law.means = {mean};
  law.variances = {variance};
  return law;
}

ErrorLaw ErrorLaw::mixture(std::vector<double> weights, std::vector<double> means,
                           std::vector<double> variances) {
  ErrorLaw law;
  law.kind = Kind::kMixture;
  law.weights = std::move(weights);
  law.means = std::move(means);
  law.variances = std::move(variances);
  return law;
}

ErrorLaw ErrorLaw::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw InputError(InputErrorCode::kInvalidArgument, "error law needs KIND:ARGS, got " + text);
  }
  const std::string kind = text.substr(0, colon);
  const std::vector<double> v = parse_numbers(text.substr(colon + 1));
  ErrorLaw law;
  if (kind == "mixhat" && v.size() == 2) {
    law = mixhat(v[0], v[1]);
  } else if (kind == "normal" && v.size() == 2) {
    law = gaussian(v[0], v[1]);
  } else if (kind == "mixture" && !v.empty() && v.size() % 3 == 0) {
    std::vector<double> w, m, s;
    for (std::size_t k = 0; k < v.size(); k += 3) {
      w.push_back(v[k]);
      m.push_back(v[k + 1]);
      s.push_back(v[k + 2]);
    }
    law = mixture(std::move(w), std::move(m), std::move(s));
  } else {
    throw InputError(InputErrorCode::kInvalidArgument, "unrecognized error law " + text);
  }
  law.validate();
  return law;
}

std::string ErrorLaw::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::kMixHat: os << "mixhat:" << nu << "," << gamma; break;
    case Kind::kGaussian: os << "normal:" << means[0] << "," << variances[0]; break;
    case Kind::kMixture:
      os << "mixture:";
      for (std::size_t k = 0; k < weights.size(); ++k) {
        os << (k ? "," : "") << weights[k] << "," << means[k] << "," << variances[k];
      }
      break;
  }
  return os.str();
}

void ErrorLaw::validate() const {
  switch (kind) {
    case Kind::kMixHat:
      MixHatParams(nu, gamma);
      return;
    case Kind::kGaussian:
      if (means.size() != 1 || variances.size() != 1 || !(variances[0] > 0.0)) {
        throw DomainError("Gaussian error law needs one mean and a positive variance");
      }
      return;
    case Kind::kMixture: {
      if (weights.empty() || weights.size() != means.size() || weights.size() != variances.size()) {
        throw DomainError("mixture components are inconsistent");
      }
      double total = 0.0;
      for (std::size_t k = 0; k < weights.size(); ++k) {
        if (!(weights[k] > 0.0) || !(variances[k] > 0.0)) {
          throw DomainError("mixture weights and variances must be positive");
        }
        total += weights[k];
      }
      if (std::abs(total - 1.0) > 1e-9) throw DomainError("mixture weights must sum to 1");
      return;
    }
  }
}

Eigen::VectorXd default_beta(Eigen::Index p) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (p > 0) beta(0) = 2.0;
  if (p > 2) beta(2) = 1.0;
  return beta;
}

void SimScenario::validate() const {
  if (n < 2 || p < 1) throw DomainError("scenario needs n >= 2 and p >= 1");
  if (beta_true.size() != p) throw DomainError("beta_true length must equal p");
  if (replicates < 1) throw DomainError("replicates must be positive");
  errors.validate();
}

bool SimScenario::has_unpaired_column() const {
  return covariates == CovariateDesign::kBlock && p % 2 == 1;
}

std::vector<std::string> SimScenario::preset_names() {
  std::vector<std::string> names;
  for (const char* table : {"table1", "table2", "table3"}) {
    for (const char* law : {"mixhat", "normal", "mixture"}) {
      names.push_back(std::string(table) + "-" + law);
    }
  }
  return names;
}

SimScenario SimScenario::preset(const std::string& name) {
  const auto dash = name.find('-');
  const std::string table = name.substr(0, dash);
  const std::string law = dash == std::string::npos ? "" : name.substr(dash + 1);
  SimScenario s;
  s.name = name;
  if (table == "table1" || table == "table2") {
    s.p = 8;
    s.n = 100;
    s.covariates = table == "table2" ? CovariateDesign::kBlock : CovariateDesign::kIndependent;
  } else if (table == "table3") {
    s.p = 80;
    s.n = 30;
  } else {
    throw InputError(InputErrorCode::kInvalidArgument, "unknown scenario " + name);
  }
  if (law == "mixhat") {
    s.errors = ErrorLaw::mixhat(3.0, 2.0);
  } else if (law == "normal") {
    s.errors = ErrorLaw::gaussian(0.0, 3.0);
  } else if (law == "mixture") {
    s.errors = ErrorLaw::mixture({0.8, 0.2}, {0.0, 5.0}, {3.0, 7.0});
  } else {
    throw InputError(InputErrorCode::kInvalidArgument, "unknown scenario " + name);
  }
  s.beta0_true = 2.0;
  s.beta_true = default_beta(s.p);
  return s;
}

Eigen::MatrixXd gen_covariates(const SimScenario& scenario, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd X(scenario.n, scenario.p);
  if (scenario.covariates == CovariateDesign::kIndependent) {
    for (Eigen::Index i = 0; i < scenario.n; ++i) {
      for (Eigen::Index j = 0; j < scenario.p; ++j) X(i, j) = z(rng);
    }
    return X;
  }
  // Cholesky factor of [[1, 0.5], [0.5, 1]] is [[1, 0], [0.5, sqrt(0.75)]].
  const double lower = std::sqrt(0.75);
  for (Eigen::Index i = 0; i < scenario.n; ++i) {
    Eigen::Index j = 0;
    for (; j + 1 < scenario.p; j += 2) {
      const double z1 = z(rng);
      const double z2 = z(rng);
      X(i, j) = z1;
      X(i, j + 1) = 0.5 * z1 + lower * z2;
    }
    if (j < scenario.p) X(i, j) = z(rng);
  }
  return X;
}

Eigen::VectorXd gen_errors(const SimScenario& scenario, std::mt19937_64& rng) {
  const ErrorLaw& law = scenario.errors;
  Eigen::VectorXd e(scenario.n);
  switch (law.kind) {
    case ErrorLaw::Kind::kMixHat: {
      const auto draws =
          mixhat_sample(MixHatParams(law.nu, law.gamma), static_cast<std::size_t>(scenario.n), rng);
      for (Eigen::Index i = 0; i < scenario.n; ++i) e(i) = draws[static_cast<std::size_t>(i)];
      break;
    }
    case ErrorLaw::Kind::kGaussian: {
      std::normal_distribution<double> g(law.means[0], std::sqrt(law.variances[0]));
      for (Eigen::Index i = 0; i < scenario.n; ++i) e(i) = g(rng);
      break;
    }
    case ErrorLaw::Kind::kMixture: {
      std::discrete_distribution<std::size_t> pick(law.weights.begin(), law.weights.end());
      std::normal_distribution<double> z(0.0, 1.0);
      for (Eigen::Index i = 0; i < scenario.n; ++i) {
        const std::size_t k = pick(rng);
        e(i) = law.means[k] + std::sqrt(law.variances[k]) * z(rng);
      }
      break;
    }
  }
  return e;
}

Eigen::VectorXd gen_response(const Eigen::MatrixXd& X, const Eigen::VectorXd& errors,
                             double beta0_true, const Eigen::VectorXd& beta_true) {
  if (X.cols() != beta_true.size() || X.rows() != errors.size()) {
    throw InputError(InputErrorCode::kDimension, "gen_response: dimension mismatch");
  }
  Eigen::VectorXd y = X * beta_true + errors;
  y.array() += beta0_true;
  return y;
}

Metrics compute_metrics(const std::vector<Eigen::Index>& selected, const Eigen::VectorXd& beta_hat,
                        const Eigen::VectorXd& beta_true) {
  if (beta_hat.size() != beta_true.size()) {
    throw InputError(InputErrorCode::kDimension, "compute_metrics: length mismatch");
  }
  const Eigen::Index p = beta_true.size();
  std::vector<bool> chosen(static_cast<std::size_t>(p), false);
  for (Eigen::Index j : selected) chosen.at(static_cast<std::size_t>(j)) = true;

  int support = 0, nulls = 0, tp = 0, tn = 0, fp = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const bool active = beta_true(j) != 0.0;
    const bool pick = chosen[static_cast<std::size_t>(j)];
    support += active;
    nulls += !active;
    tp += active && pick;
    fp += !active && pick;
    tn += !active && !pick;
  }
  Metrics m;
  if (support > 0) m.tpr = static_cast<double>(tp) / support;
  if (nulls > 0) m.fpr = static_cast<double>(fp) / nulls;
  m.acr = static_cast<double>(tp + tn) / static_cast<double>(p);
  m.mse = (beta_hat - beta_true).squaredNorm() / static_cast<double>(p);
  return m;
}

ReplicateOutcome run_replicate(const SimScenario& scenario, const MethodConfig& method, int r) {
  ReplicateOutcome out;
  out.replicate = r;
  const auto rep = static_cast<std::uint64_t>(r);
  try {
    std::mt19937_64 rng(derive_seed(scenario.seed, {rep}));
    const Eigen::MatrixXd X = gen_covariates(scenario, rng);
    const Eigen::VectorXd e = gen_errors(scenario, rng);
    const Dataset data(X, gen_response(X, e, scenario.beta0_true, scenario.beta_true));

    Hyperparams hyper = Hyperparams::defaults(data.p(), method.t0.value_or(10.0), method.t1);
    if (!method.t0) {
      TuningGrid grid = method.grid;
      grid.t1_fixed = method.t1;
      grid.seed = derive_seed(scenario.seed, {rep, 2});
      hyper.t0 = cv_tune_t0(data, grid, hyper, method.em).chosen_t0;
    }
    out.t0_used = hyper.t0;

    SelectionConfig sel = method.selection;
    sel.master_seed = derive_seed(scenario.seed, {rep, 1});
    const SelectionResult result = tdvs_select(data, hyper, method.em, sel);
    out.selected = result.selected;
    out.beta_hat = result.fit.params.beta;
    out.tdvs = compute_metrics(out.selected, out.beta_hat, scenario.beta_true);

    if (method.lasso_baseline) {
      Hyperparams flat = hyper;
      flat.t1 = flat.t0;
      const FitResult lasso = fit(data, flat, method.em);
      std::vector<Eigen::Index> nonzero;
      for (Eigen::Index j = 0; j < data.p(); ++j) {
        if (lasso.params.beta(j) != 0.0) nonzero.push_back(j);
      }
      out.lasso = compute_metrics(nonzero, lasso.params.beta, scenario.beta_true);
    }
    out.ok = true;
  } catch (const std::exception& ex) {
    out.ok = false;
    out.error = ex.what();
  }
  return out;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  s.mean = mean;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    s.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

namespace {

MethodSummary summarize_method(const std::vector<const Metrics*>& metrics) {
  std::vector<double> tpr, fpr, acr, mse;
  for (const Metrics* m : metrics) {
    if (m->tpr) tpr.push_back(*m->tpr);
    if (m->fpr) fpr.push_back(*m->fpr);
    acr.push_back(m->acr);
    mse.push_back(m->mse);
  }
  return {summarize(tpr), summarize(fpr), summarize(acr), summarize(mse)};
}

}  // namespace

StudyResult run_study(const SimScenario& scenario, const MethodConfig& method,
                      std::size_t threads) {
  scenario.validate();
  method.selection.validate();
  method.em.validate();

  StudyResult study;
  study.replicates.resize(static_cast<std::size_t>(scenario.replicates));
  parallel_for(study.replicates.size(), threads, [&](std::size_t r) {
    study.replicates[r] = run_replicate(scenario, method, static_cast<int>(r));
  });

  std::vector<const Metrics*> tdvs, lasso;
  for (const ReplicateOutcome& o : study.replicates) {
    if (!o.ok) {
      ++study.failed;
      continue;
    }
    ++study.completed;
    tdvs.push_back(&o.tdvs);
    if (o.lasso) lasso.push_back(&*o.lasso);
  }
  study.tdvs = summarize_method(tdvs);
  if (method.lasso_baseline) study.lasso = summarize_method(lasso);
  return study;
}

}  // namespace tdvs
