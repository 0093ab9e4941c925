#include "tdvs/report.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iostream>
#include <memory>

#include "tdvs/errors.hpp"

namespace tdvs {

namespace {

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

std::string sha256_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError(InputErrorCode::kIo, "cannot open " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 unavailable");
  }
  std::array<char, 1 << 16> buffer{};
  while (file) {
    file.read(buffer.data(), buffer.size());
    if (file.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(file.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &length);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

Json to_json(const Hyperparams& h) {
  return {{"t0", h.t0}, {"t1", h.t1}, {"a", h.a}, {"b", h.b}, {"c", h.c}, {"d", h.d},
          {"beta0_prior_variance", h.beta0_prior_variance}};
}

Json to_json(const EMConfig& c) {
  return {{"convergence_tol", c.convergence_tol},
          {"max_iterations", c.max_iterations},
          {"coordinate_sweep_tol", c.coordinate_sweep_tol},
          {"max_sweeps_per_mstep", c.max_sweeps_per_mstep},
          {"line_search_expansions", c.line_search_expansions}};
}

Json to_json(const SelectionConfig& c) {
  return {{"permutations", c.final_permutations},
          {"b1", c.group_permutations},
          {"b2", c.individual_permutations},
          {"alpha", c.alpha},
          {"alpha0", c.alpha0},
          {"group_size", c.group_size},
          {"delta", c.delta},
          {"prescreen", to_string(c.prescreen)},
          {"seed", c.master_seed}};
}

Json to_json(const TuningGrid& g) {
  return {{"t0_candidates", g.t0_candidates}, {"t1", g.t1_fixed}, {"folds", g.folds}, {"seed", g.seed}};
}

Json to_json(const ErrorLaw& law) { return law.describe(); }

Json to_json(const SimScenario& s) {
  return {{"name", s.name},
          {"n", s.n},
          {"p", s.p},
          {"beta0_true", s.beta0_true},
          {"beta_true", vector_json(s.beta_true)},
          {"covariates", s.covariates == CovariateDesign::kBlock ? "block" : "independent"},
          {"unpaired_last_column", s.has_unpaired_column()},
          {"errors", to_json(s.errors)},
          {"replicates", s.replicates},
          {"seed", s.seed}};
}

Json to_json(const MethodConfig& m) {
  Json out = {{"t0", m.t0 ? Json(*m.t0) : Json("tune")}, {"t1", m.t1}};
  if (!m.t0) out["tuning"] = to_json(m.grid);
  out["selection"] = to_json(m.selection);
  out["em"] = to_json(m.em);
  out["lasso_baseline"] = m.lasso_baseline;
  return out;
}

Json to_json(const RegressionParams& p) {
  return {{"beta0", p.beta0}, {"beta", vector_json(p.beta)}, {"nu", p.nu}, {"gamma", p.gamma},
          {"theta", p.theta}};
}

Json to_json(const FitResult& f) {
  return {{"estimates", to_json(f.params)},
          {"inclusion_probabilities", vector_json(f.inclusion_probs)},
          {"iterations", f.iterations},
          {"converged", f.converged},
          {"marginal_log_posterior", f.final_marginal_log_posterior},
          {"retained_updates", f.retained_updates},
          {"objective_trace", f.objective_trace}};
}

Json to_json(const CiSResult& t) {
  return {{"target", t.target},
          {"statistic", t.statistic},
          {"p_value", t.p_value},
          {"valid_permutations", t.permuted_statistics.size()},
          {"failed_permutations", t.failed_permutations},
          {"unreliable", t.unreliable}};
}

namespace {

Json tests_json(const std::vector<CiSResult>& tests) {
  Json out = Json::array();
  for (const auto& t : tests) out.push_back(to_json(t));
  return out;
}

}  // namespace

Json to_json(const StageTrace& t) {
  return {{"groups", t.groups},
          {"group_tests", tests_json(t.group_tests)},
          {"dropped_at_group_stage", t.dropped_at_group_stage},
          {"individual_tests", tests_json(t.individual_tests)},
          {"dropped_at_individual_stage", t.dropped_at_individual_stage},
          {"final_tests", tests_json(t.final_tests)}};
}

Json to_json(const SelectionResult& r, const std::vector<std::string>& names) {
  Json covariates = Json::array();
  for (std::size_t j = 0; j < names.size(); ++j) {
    Json entry = {{"index", j}, {"name", names[j]}, {"estimate", r.fit.params.beta(static_cast<Eigen::Index>(j))},
                  {"inclusion_probability", r.fit.inclusion_probs(static_cast<Eigen::Index>(j))},
                  {"p_value", nullptr}, {"selected", false}};
    covariates.push_back(std::move(entry));
  }
  for (const CiSResult& t : r.trace.final_tests) {
    Json& entry = covariates[static_cast<std::size_t>(t.target.front())];
    entry["statistic"] = t.statistic;
    entry["p_value"] = t.p_value;
  }
  Json selected_names = Json::array();
  for (Eigen::Index j : r.selected) {
    covariates[static_cast<std::size_t>(j)]["selected"] = true;
    selected_names.push_back(names[static_cast<std::size_t>(j)]);
  }
  return {{"selected", r.selected},
          {"selected_names", selected_names},
          {"prescreen_used", r.prescreen_used},
          {"covariates", covariates},
          {"trace", to_json(r.trace)},
          {"fit", to_json(r.fit)}};
}

Json to_json(const TuningResult& r) {
  Json table = Json::array();
  for (const auto& c : r.table) table.push_back({{"t0", c.t0}, {"pmse", optional_json(c.pmse)}});
  return {{"chosen_t0", r.chosen_t0}, {"candidates", table}};
}

Json to_json(const Metrics& m) {
  return {{"tpr", optional_json(m.tpr)}, {"fpr", optional_json(m.fpr)}, {"acr", m.acr}, {"mse", m.mse}};
}

Json to_json(const MetricSummary& s) {
  return {{"mean", optional_json(s.mean)}, {"se", optional_json(s.se)}, {"count", s.count}};
}

Json to_json(const MethodSummary& s) {
  return {{"tpr", to_json(s.tpr)}, {"fpr", to_json(s.fpr)}, {"acr", to_json(s.acr)}, {"mse", to_json(s.mse)}};
}

Json to_json(const ReplicateOutcome& o) {
  Json out = {{"replicate", o.replicate}, {"ok", o.ok}};
  if (!o.ok) {
    out["error"] = o.error;
    return out;
  }
  out["t0"] = o.t0_used;
  out["selected"] = o.selected;
  out["beta_hat"] = vector_json(o.beta_hat);
  out["metrics"] = to_json(o.tdvs);
  if (o.lasso) out["lasso_metrics"] = to_json(*o.lasso);
  return out;
}

Json to_json(const StudyResult& s, bool include_replicates) {
  Json out = {{"completed", s.completed}, {"failed", s.failed}, {"tdvs", to_json(s.tdvs)}};
  if (s.lasso) out["lasso"] = to_json(*s.lasso);
  if (include_replicates) {
    Json reps = Json::array();
    for (const auto& r : s.replicates) reps.push_back(to_json(r));
    out["replicates"] = std::move(reps);
  }
  return out;
}

Json make_manifest(const std::string& command, const std::optional<std::string>& input_path) {
  Json m = {{"command", command}, {"tool", "tdvs"}, {"version", kToolVersion},
            {"format_version", kFormatVersion}};
  if (input_path) {
    m["input"] = *input_path;
    m["input_sha256"] = sha256_file(*input_path);
  }
  return m;
}

std::string render(const Json& doc) { return doc.dump(2) + "\n"; }

void write_document(const Json& doc, const std::string& path) {
  const std::string text = render(doc);
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(InputErrorCode::kIo, "cannot write " + path);
  out << text;
  if (!out) throw InputError(InputErrorCode::kIo, "failed writing " + path);
}

}  // namespace tdvs
