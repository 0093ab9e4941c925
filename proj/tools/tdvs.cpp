#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "tdvs/commands.hpp"
#include "tdvs/errors.hpp"
#include "tdvs/parallel.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw tdvs::InputError(tdvs::InputErrorCode::kInvalidArgument, "bad number in list: '" + item + "'");
    }
  }
  if (out.empty()) throw tdvs::InputError(tdvs::InputErrorCode::kInvalidArgument, "empty list");
  return out;
}

void add_input_flags(CLI::App* cmd, tdvs::InputOptions& in) {
  cmd->add_option("--input", in.path, "CSV file")->required();
  cmd->add_option("--response", in.response, "response column: header name or 0-based index")
      ->capture_default_str();
  cmd->add_flag("--no-header{false}", in.has_header, "first line is data, not column names");
}

void add_em_flags(CLI::App* cmd, tdvs::EMConfig& em) {
  cmd->add_option("--max-iter", em.max_iterations, "EM iteration cap")->capture_default_str();
  cmd->add_option("--tol", em.convergence_tol, "EM convergence tolerance")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Testing-driven variable selection for Bayesian modal regression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("tdvs ") + tdvs::kToolVersion + " (output format " +
                                        std::to_string(tdvs::kFormatVersion) + ")");

  std::string output;
  std::size_t threads = 0;

  tdvs::FitOptions fit_opts;
  auto* fit_cmd = app.add_subcommand("fit", "MAP fit by EM");
  add_input_flags(fit_cmd, fit_opts.input);
  fit_cmd->add_option("--t0", fit_opts.t0, "spike rate")->capture_default_str();
  fit_cmd->add_option("--t1", fit_opts.t1, "slab rate")->capture_default_str();
  fit_cmd->add_option("--seed", fit_opts.seed, "recorded in the manifest")->capture_default_str();
  add_em_flags(fit_cmd, fit_opts.em);
  fit_cmd->add_option("--output", output, "output file (default stdout)");

  tdvs::SelectOptions sel_opts;
  std::string prescreen = "auto";
  std::string select_grid;
  auto* sel_cmd = app.add_subcommand("select", "permutation-test variable selection");
  add_input_flags(sel_cmd, sel_opts.fit.input);
  sel_cmd->add_option("--t0", sel_opts.fit.t0, "spike rate")->capture_default_str();
  sel_cmd->add_option("--t1", sel_opts.fit.t1, "slab rate")->capture_default_str();
  sel_cmd->add_option("--seed", sel_opts.fit.seed, "master seed")->capture_default_str();
  add_em_flags(sel_cmd, sel_opts.fit.em);
  sel_cmd->add_option("--permutations", sel_opts.selection.final_permutations, "final-stage permutations")
      ->capture_default_str();
  sel_cmd->add_option("--alpha", sel_opts.selection.alpha, "final-stage level")->capture_default_str();
  sel_cmd->add_option("--prescreen", prescreen, "auto|on|off (auto: on iff p > n)")->capture_default_str();
  sel_cmd->add_option("--group-size", sel_opts.selection.group_size, "group size for screening")
      ->capture_default_str();
  sel_cmd->add_option("--b1", sel_opts.selection.group_permutations, "group-stage permutations")
      ->capture_default_str();
  sel_cmd->add_option("--b2", sel_opts.selection.individual_permutations, "individual-stage permutations")
      ->capture_default_str();
  sel_cmd->add_option("--alpha0", sel_opts.selection.alpha0, "screening level")->capture_default_str();
  sel_cmd->add_option("--tune-t0", select_grid, "comma-separated t0 grid; tune by cross-validation first");
  sel_cmd->add_option("--folds", sel_opts.folds, "folds when tuning")->capture_default_str();
  sel_cmd->add_option("--threads", threads, "worker threads (0: TDVS_THREADS or all cores)");
  sel_cmd->add_option("--output", output, "output file (default stdout)");

  tdvs::TuneOptions tune_opts;
  std::string tune_grid = "1,3,10,30,100";
  auto* tune_cmd = app.add_subcommand("tune", "choose t0 by k-fold cross-validation");
  add_input_flags(tune_cmd, tune_opts.input);
  tune_cmd->add_option("--grid", tune_grid, "comma-separated t0 candidates")->capture_default_str();
  tune_cmd->add_option("--t1", tune_opts.grid.t1_fixed, "fixed slab rate")->capture_default_str();
  tune_cmd->add_option("--folds", tune_opts.grid.folds, "number of folds")->capture_default_str();
  tune_cmd->add_option("--seed", tune_opts.grid.seed, "fold assignment seed")->capture_default_str();
  add_em_flags(tune_cmd, tune_opts.em);
  tune_cmd->add_option("--threads", threads, "worker threads (0: TDVS_THREADS or all cores)");
  tune_cmd->add_option("--output", output, "output file (default stdout)");

  tdvs::SimulateOptions sim_opts;
  std::string scenario_name;
  std::string sim_t0 = "10";
  std::string sim_grid = "1,3,10,30,100";
  std::string beta_text, covariates = "independent", errors = "mixhat:3,2";
  long long sim_n = 100, sim_p = 8;
  int replicates = 50;
  std::uint64_t sim_seed = 0;
  std::string sim_prescreen = "auto";
  bool no_replicate_detail = false;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study");
  sim_cmd->add_option("--scenario", scenario_name, "preset: table{1,2,3}-{mixhat,normal,mixture}");
  sim_cmd->add_option("--n", sim_n, "sample size (custom scenario)")->capture_default_str();
  sim_cmd->add_option("--p", sim_p, "covariates (custom scenario)")->capture_default_str();
  sim_cmd->add_option("--beta", beta_text, "comma-separated true effects (default 2,0,1,0,...)");
  sim_cmd->add_option("--beta0", sim_opts.scenario.beta0_true, "true intercept")->capture_default_str();
  sim_cmd->add_option("--covariates", covariates, "independent|block")->capture_default_str();
  sim_cmd->add_option("--errors", errors, "mixhat:NU,GAMMA | normal:MEAN,VAR | mixture:W,MEAN,VAR,...")
      ->capture_default_str();
  sim_cmd->add_option("--replicates", replicates, "Monte Carlo replicates")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "master seed")->capture_default_str();
  sim_cmd->add_option("--t0", sim_t0, "spike rate, or 'tune'")->capture_default_str();
  sim_cmd->add_option("--t1", sim_opts.method.t1, "slab rate")->capture_default_str();
  sim_cmd->add_option("--grid", sim_grid, "t0 grid when tuning")->capture_default_str();
  sim_cmd->add_option("--permutations", sim_opts.method.selection.final_permutations, "final-stage permutations")
      ->capture_default_str();
  sim_cmd->add_option("--alpha", sim_opts.method.selection.alpha, "final-stage level")->capture_default_str();
  sim_cmd->add_option("--prescreen", sim_prescreen, "auto|on|off")->capture_default_str();
  sim_cmd->add_flag("--lasso-baseline", sim_opts.method.lasso_baseline, "also report the t0 = t1 fit");
  sim_cmd->add_flag("--summary-only", no_replicate_detail, "omit per-replicate detail");
  sim_cmd->add_option("--threads", threads, "worker threads (0: TDVS_THREADS or all cores)");
  sim_cmd->add_option("--output", output, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    const std::size_t workers = tdvs::resolve_threads(threads);
    tdvs::Json doc;
    if (*fit_cmd) {
      doc = tdvs::run_fit_command(fit_opts);
    } else if (*sel_cmd) {
      sel_opts.selection.prescreen = tdvs::parse_prescreen(prescreen);
      if (!select_grid.empty()) sel_opts.tune_grid = parse_list(select_grid);
      sel_opts.threads = workers;
      doc = tdvs::run_select_command(sel_opts);
    } else if (*tune_cmd) {
      tune_opts.grid.t0_candidates = parse_list(tune_grid);
      tune_opts.threads = workers;
      doc = tdvs::run_tune_command(tune_opts);
    } else {
      tdvs::SimScenario& s = sim_opts.scenario;
      if (!scenario_name.empty()) {
        const double beta0 = s.beta0_true;
        s = tdvs::SimScenario::preset(scenario_name);
        if (sim_cmd->count("--beta0")) s.beta0_true = beta0;
      } else {
        s.n = sim_n;
        s.p = sim_p;
        if (covariates == "block") {
          s.covariates = tdvs::CovariateDesign::kBlock;
        } else if (covariates != "independent") {
          throw tdvs::InputError(tdvs::InputErrorCode::kInvalidArgument, "--covariates must be independent or block");
        }
        s.errors = tdvs::ErrorLaw::parse(errors);
        s.beta_true = tdvs::default_beta(s.p);
      }
      if (!beta_text.empty()) {
        const auto beta = parse_list(beta_text);
        s.beta_true = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
      }
      s.replicates = replicates;
      s.seed = sim_seed;
      if (sim_t0 == "tune") {
        sim_opts.method.t0.reset();
        sim_opts.method.grid.t0_candidates = parse_list(sim_grid);
      } else {
        sim_opts.method.t0 = parse_list(sim_t0).at(0);
      }
      sim_opts.method.selection.prescreen = tdvs::parse_prescreen(sim_prescreen);
      sim_opts.include_replicates = !no_replicate_detail;
      sim_opts.threads = workers;
      doc = tdvs::run_simulate_command(sim_opts);
    }
    tdvs::write_document(doc, output);
  } catch (const tdvs::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const tdvs::DomainError& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitInput;
  } catch (const tdvs::NumericalError& e) {
    std::cerr << "numerical failure at iteration " << e.iteration() << ": " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
