#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "eflow/core/matrix.hpp"
#include "eflow/data/dataset.hpp"

namespace eflow::data {

/// Comma separated numeric table, optional single header line. Ragged rows
/// and unparsable or non-finite fields are ingestion errors that name the
/// line.
Dataset parse_csv(std::string_view text, bool has_header, std::string name = {});
Dataset load_csv(const std::string &path, bool has_header);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

void write_csv(std::ostream &out, const Matrix &rows, const std::vector<std::string> &names);
void save_csv(const std::string &path, const Matrix &rows, const std::vector<std::string> &names);

/// Header used when a dataset carries no column names: x0, x1, ...
std::vector<std::string> default_names(Index d);

}  // namespace eflow::data
