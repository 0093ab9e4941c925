#include "tdvs/commands.hpp"

#include "tdvs/csv.hpp"
#include "tdvs/errors.hpp"
#include "tdvs/parallel.hpp"

namespace tdvs {

namespace {

LoadedCsv load(const InputOptions& input) {
  return load_csv(input.path, parse_column_ref(input.response), input.has_header);
}

Json data_summary(const LoadedCsv& csv) {
  return {{"n", csv.data.n()},
          {"p", csv.data.p()},
          {"response", csv.response_name},
          {"covariates", csv.data.column_names()},
          {"constant_columns", csv.constant_columns}};
}

Json input_manifest(const std::string& command, const InputOptions& input) {
  Json m = make_manifest(command, input.path);
  m["response"] = input.response;
  m["has_header"] = input.has_header;
  return m;
}

}  // namespace

Json run_fit_command(const FitOptions& options) {
  options.em.validate();
  const LoadedCsv csv = load(options.input);
  const Hyperparams hyper = Hyperparams::defaults(csv.data.p(), options.t0, options.t1);
  hyper.validate();

  Json manifest = input_manifest("fit", options.input);
  manifest["seed"] = options.seed;
  manifest["hyperparams"] = to_json(hyper);
  manifest["em"] = to_json(options.em);

  const FitResult result = fit(csv.data, hyper, options.em);
  Json out = {{"manifest", manifest}, {"data", data_summary(csv)}, {"fit", to_json(result)}};
  return out;
}

Json run_select_command(const SelectOptions& options) {
  options.fit.em.validate();
  options.selection.validate();
  const LoadedCsv csv = load(options.fit.input);
  Hyperparams hyper = Hyperparams::defaults(csv.data.p(), options.fit.t0, options.fit.t1);
  SelectionConfig sel = options.selection;
  sel.master_seed = options.fit.seed;

  Json manifest = input_manifest("select", options.fit.input);
  manifest["seed"] = options.fit.seed;

  Json tuning = nullptr;
  if (options.tune_grid) {
    TuningGrid grid;
    grid.t0_candidates = *options.tune_grid;
    grid.t1_fixed = options.fit.t1;
    grid.folds = options.folds;
    grid.seed = derive_seed(options.fit.seed, {5});
    manifest["tuning"] = to_json(grid);
    const TuningResult tuned = cv_tune_t0(csv.data, grid, hyper, options.fit.em, options.threads);
    hyper.t0 = tuned.chosen_t0;
    tuning = to_json(tuned);
  }
  hyper.validate();
  manifest["hyperparams"] = to_json(hyper);
  manifest["em"] = to_json(options.fit.em);
  manifest["selection"] = to_json(sel);

  const SelectionResult result = tdvs_select(csv.data, hyper, options.fit.em, sel, options.threads);
  Json out = {{"manifest", manifest}, {"data", data_summary(csv)}};
  if (!tuning.is_null()) out["tuning"] = tuning;
  out["selection"] = to_json(result, csv.data.column_names());
  return out;
}

Json run_tune_command(const TuneOptions& options) {
  options.em.validate();
  const LoadedCsv csv = load(options.input);
  const Hyperparams base = Hyperparams::defaults(csv.data.p(), 10.0, options.grid.t1_fixed);

  Json manifest = input_manifest("tune", options.input);
  manifest["tuning"] = to_json(options.grid);
  manifest["hyperparams"] = to_json(base);
  manifest["em"] = to_json(options.em);

  const TuningResult result = cv_tune_t0(csv.data, options.grid, base, options.em, options.threads);
  return {{"manifest", manifest}, {"data", data_summary(csv)}, {"tuning", to_json(result)}};
}

Json run_simulate_command(const SimulateOptions& options) {
  Json manifest = make_manifest("simulate", std::nullopt);
  manifest["scenario"] = to_json(options.scenario);
  manifest["method"] = to_json(options.method);
  const StudyResult study = run_study(options.scenario, options.method, options.threads);
  return {{"manifest", manifest}, {"study", to_json(study, options.include_replicates)}};
}

}  // namespace tdvs
