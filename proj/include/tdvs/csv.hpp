#pragma once

#include <string>
#include <variant>
#include <vector>

#include "tdvs/model.hpp"

namespace tdvs {

/// Response column given by header name or by 0-based position in the file.
using ColumnRef = std::variant<std::string, std::size_t>;

/// Interprets text as a column position if it is all digits, else as a name.
ColumnRef parse_column_ref(const std::string& text);

struct LoadedCsv {
  Dataset data;
  std::string response_name;
  std::vector<Eigen::Index> constant_columns;  // covariate indices
};

/// Comma-separated numbers with dot decimals, optional header. Every other
/// column becomes a covariate, in file order. Parse failures name the
/// 1-based line and column of the offending cell.
LoadedCsv load_csv(const std::string& path, const ColumnRef& response, bool has_header = true);

/// Same, from an in-memory document. `source` labels error messages.
LoadedCsv parse_csv(const std::string& text, const ColumnRef& response, bool has_header = true,
                    const std::string& source = "<memory>");

}  // namespace tdvs
