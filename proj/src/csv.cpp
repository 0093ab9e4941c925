#include "tdvs/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tdvs/errors.hpp"

namespace tdvs {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string location(const std::string& source, std::size_t line, std::size_t column) {
  return source + ":" + std::to_string(line) + ": column " + std::to_string(column);
}

}  // namespace

ColumnRef parse_column_ref(const std::string& text) {
  if (!text.empty() && std::all_of(text.begin(), text.end(),
                                   [](unsigned char c) { return c >= '0' && c <= '9'; })) {
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), index);
    if (ec == std::errc() && ptr == text.data() + text.size()) return index;
  }
  return text;
}

LoadedCsv parse_csv(const std::string& text, const ColumnRef& response, bool has_header,
                    const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (width == 0) {
      width = cells.size();
      if (has_header) {
        header = std::move(cells);
        continue;
      }
    }
    if (cells.size() != width) {
      throw InputError(InputErrorCode::kDimension,
                       source + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(width) + " fields, found " +
                           std::to_string(cells.size()));
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      const std::string& cell = cells[c];
      if (cell.empty()) {
        throw InputError(InputErrorCode::kParse, location(source, line_no, c + 1) + ": missing value");
      }
      const char* begin = cell.data() + (cell.front() == '+' ? 1 : 0);
      const char* end = cell.data() + cell.size();
      const auto [ptr, ec] = std::from_chars(begin, end, row[c]);
      if (ec != std::errc() || ptr != end || !std::isfinite(row[c])) {
        throw InputError(InputErrorCode::kParse,
                         location(source, line_no, c + 1) + ": not a finite number '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (width == 0) throw InputError(InputErrorCode::kDimension, source + ": no data");
  if (width < 2) {
    throw InputError(InputErrorCode::kDimension, source + ": need a response and at least one covariate");
  }

  std::size_t target = 0;
  if (const auto* name = std::get_if<std::string>(&response)) {
    const auto it = has_header ? std::find(header.begin(), header.end(), *name) : header.end();
    if (it == header.end()) {
      throw InputError(InputErrorCode::kMissingColumn, source + ": no column named '" + *name + "'");
    }
    target = static_cast<std::size_t>(it - header.begin());
  } else {
    target = std::get<std::size_t>(response);
    if (target >= width) {
      throw InputError(InputErrorCode::kMissingColumn,
                       source + ": column index " + std::to_string(target) + " out of range");
    }
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(width - 1);
  if (n < 2) throw InputError(InputErrorCode::kDimension, source + ": need at least two data rows");
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < width; ++c) {
    if (c == target) continue;
    names.push_back(has_header ? header[c] : "x" + std::to_string(names.size() + 1));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    Eigen::Index j = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == target) {
        y(i) = row[c];
      } else {
        X(i, j++) = row[c];
      }
    }
  }
  std::string response_name = has_header ? header[target] : "column" + std::to_string(target);
  Dataset data(std::move(X), std::move(y), std::move(names));
  auto constant = data.constant_columns();
  return {std::move(data), std::move(response_name), std::move(constant)};
}

LoadedCsv load_csv(const std::string& path, const ColumnRef& response, bool has_header) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError(InputErrorCode::kIo, "cannot open " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_csv(buffer.str(), response, has_header, path);
}

}  // namespace tdvs
