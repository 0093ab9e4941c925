#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tdvs/report.hpp"

namespace tdvs {

struct InputOptions {
  std::string path;
  std::string response = "0";  // header name or 0-based column index
  bool has_header = true;
};

struct FitOptions {
  InputOptions input;
  double t0 = 10.0;
  double t1 = 1.0;
  std::uint64_t seed = 0;
  EMConfig em;
};

struct SelectOptions {
  FitOptions fit;
  SelectionConfig selection;
  std::optional<std::vector<double>> tune_grid;  // tune t0 over this grid first
  int folds = 5;
  std::size_t threads = 1;  // not part of the output
};

struct TuneOptions {
  InputOptions input;
  TuningGrid grid;
  EMConfig em;
  std::size_t threads = 1;
};

struct SimulateOptions {
  SimScenario scenario;
  MethodConfig method;
  std::size_t threads = 1;
  bool include_replicates = true;
};

/// Each command returns the complete output document, manifest included.
/// Thread counts never appear in the document.
Json run_fit_command(const FitOptions& options);
Json run_select_command(const SelectOptions& options);
Json run_tune_command(const TuneOptions& options);
Json run_simulate_command(const SimulateOptions& options);

}  // namespace tdvs
