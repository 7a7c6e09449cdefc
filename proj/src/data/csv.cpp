#include "eflow/data/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "eflow/core/error.hpp"

namespace eflow::data {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Dataset parse_csv(std::string_view text, bool has_header, std::string name) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) raise(ErrorKind::ingestion, "empty csv input");

  std::vector<std::string> names;
  std::size_t first = 0;
  if (has_header) {
    for (auto f : fields(lines[0])) names.emplace_back(f);
    first = 1;
  }
  const std::size_t width = has_header ? names.size() : fields(lines[0]).size();
  const auto n = static_cast<Index>(lines.size() - first);
  Matrix points(n, static_cast<Index>(width));
  for (std::size_t l = first; l < lines.size(); ++l) {
    const std::string where = "line " + std::to_string(l + 1);
    const auto row = fields(lines[l]);
    if (row.size() != width) {
      raise(ErrorKind::ingestion, where + ": expected " + std::to_string(width) + " fields, got " +
                                      std::to_string(row.size()));
    }
    for (std::size_t c = 0; c < width; ++c) {
      double value = 0.0;
      const auto f = row[c];
      const char *begin = f.data();
      if (!f.empty() && f.front() == '+') ++begin;
      const auto [ptr, ec] = std::from_chars(begin, f.data() + f.size(), value);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(value)) {
        raise(ErrorKind::ingestion,
              where + ", field " + std::to_string(c + 1) + ": not a finite number '" +
                  std::string(f) + "'");
      }
      points(static_cast<Index>(l - first), static_cast<Index>(c)) = value;
    }
  }
  return make_dataset(std::move(points), std::move(name), std::move(names));
}

Dataset load_csv(const std::string &path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::ingestion, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), has_header, path);
}

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) raise(ErrorKind::numeric, "cannot format number");
  return std::string(buf, ptr);
}

std::vector<std::string> default_names(Index d) {
  std::vector<std::string> names;
  for (Index c = 0; c < d; ++c) names.push_back("x" + std::to_string(c));
  return names;
}

void write_csv(std::ostream &out, const Matrix &rows, const std::vector<std::string> &names) {
  if (!names.empty()) {
    if (static_cast<Index>(names.size()) != rows.cols()) {
      raise(ErrorKind::dimension, "header width does not match rows");
    }
    for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
    out << '\n';
  }
  for (Index r = 0; r < rows.rows(); ++r) {
    for (Index c = 0; c < rows.cols(); ++c) out << (c ? "," : "") << format_double(rows(r, c));
    out << '\n';
  }
}

void save_csv(const std::string &path, const Matrix &rows, const std::vector<std::string> &names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::ingestion, "cannot write " + path);
  write_csv(out, rows, names);
  if (!out) raise(ErrorKind::ingestion, "failed writing " + path);
}

}  // namespace eflow::data
