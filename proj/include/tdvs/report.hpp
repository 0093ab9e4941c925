#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>
#include "tdvs/em.hpp"
#include "tdvs/model.hpp"
#include "tdvs/selection.hpp"
#include "tdvs/simulation.hpp"
#include "tdvs/tuning.hpp"

namespace tdvs {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kFormatVersion = 1;

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

Json to_json(const Hyperparams& hyper);
Json to_json(const EMConfig& config);
Json to_json(const SelectionConfig& config);
Json to_json(const TuningGrid& grid);
Json to_json(const ErrorLaw& law);
Json to_json(const SimScenario& scenario);
Json to_json(const MethodConfig& method);

Json to_json(const RegressionParams& params);
Json to_json(const FitResult& fit);
Json to_json(const CiSResult& test);
Json to_json(const StageTrace& trace);
Json to_json(const SelectionResult& result, const std::vector<std::string>& names);
Json to_json(const TuningResult& result);
Json to_json(const Metrics& metrics);
Json to_json(const MetricSummary& summary);
Json to_json(const MethodSummary& summary);
Json to_json(const ReplicateOutcome& outcome);
Json to_json(const StudyResult& study, bool include_replicates = true);

/// Manifest skeleton: command, tool and format version, input path and digest.
Json make_manifest(const std::string& command, const std::optional<std::string>& input_path);

/// Pretty-printed document with a trailing newline.
std::string render(const Json& doc);

/// Writes to `path`, or to standard output when path is empty or "-".
void write_document(const Json& doc, const std::string& path);

}  // namespace tdvs
