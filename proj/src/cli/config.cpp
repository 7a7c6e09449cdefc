#include "eflow/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "eflow/core/error.hpp"

namespace eflow::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(const std::string &key, const std::string &value, const char *expected) {
  raise(ErrorKind::config, "config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

template <typename T>
T parse_number(const std::string &key, const std::string &value, const char *expected) {
  T out{};
  const char *end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) bad_value(key, value, expected);
  return out;
}

std::vector<std::string> split_list(const std::string &value) {
  std::vector<std::string> parts;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) parts.push_back(trim(item));
  return parts;
}

}  // namespace

const std::map<std::string, std::string> &RunConfig::defaults() {
  static const std::map<std::string, std::string> table = {
      // data
      {"data", ""},
      {"header", "true"},
      {"synth", ""},
      {"synth_n", "2000"},
      {"synth_seed", "0"},
      {"embed_dim", "0"},
      {"embed_noise", "0.1"},
      {"standardize", "true"},
      {"constant_columns", "error"},
      {"column_order", ""},
      {"split_train", "0.8"},
      {"split_val", "0.1"},
      {"split_test", "0.1"},
      {"split_seed", "0"},
      // architecture
      {"arch", "dif"},
      {"layers", "3"},
      {"hidden_activation", "leaky_relu"},
      {"final_activation", "identity"},
      {"sigma", "0.5"},
      {"activity_weight", "0"},
      {"leaky_alpha", "0.01"},
      {"init_scale", "0.1"},
      {"blocks", "1"},
      {"cond_init_scale", "1"},
      {"ref_widths", ""},
      // objective
      {"objective", "energy"},
      {"kernel", "euclidean"},
      {"beta", "1"},
      {"gamma", "1"},
      {"bandwidths", "2,5,10,20,40,80"},
      {"pairing", "u_statistic"},
      {"projections", "200"},
      {"slice_seed", "0"},
      // training
      {"trainer", "energy"},
      {"learning_rate", "0.001"},
      {"batch_size", "200"},
      {"epochs", "10"},
      {"seed", "0"},
      {"adam_beta1", "0.9"},
      {"adam_beta2", "0.999"},
      {"adam_eps", "1e-08"},
      {"checkpoint_every", "0"},
      {"samples_per_datum", "8"},
      {"clip_norm", "100"},
      {"bias_only", "false"},
      // evaluation and output
      {"n_gen", "0"},
      {"d_loss_per_class", "300"},
      {"out", ""},
  };
  return table;
}

RunConfig RunConfig::parse(std::string_view text, const std::string &source) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find('\n', pos);
    std::string_view line = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    pos = next == std::string_view::npos ? text.size() + 1 : next + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      raise(ErrorKind::config, source + " line " + std::to_string(line_no) + ": expected key=value");
    }
    try {
      cfg.set(trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)));
    } catch (const Error &e) {
      raise(e.kind(), source + " line " + std::to_string(line_no) + ": " + e.message());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::config, "cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path);
}

void RunConfig::set(const std::string &key, const std::string &value) {
  if (!defaults().contains(key)) raise(ErrorKind::config, "unknown config key '" + key + "'");
  values_[key] = value;
}

bool RunConfig::given(const std::string &key) const { return values_.contains(key); }

std::string RunConfig::text(const std::string &key) const {
  const auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  const auto d = defaults().find(key);
  if (d == defaults().end()) raise(ErrorKind::contract, "unknown config key '" + key + "'");
  return d->second;
}

long long RunConfig::integer(const std::string &key) const {
  return parse_number<long long>(key, text(key), "an integer");
}

std::uint64_t RunConfig::unsigned_integer(const std::string &key) const {
  return parse_number<std::uint64_t>(key, text(key), "a non-negative integer");
}

double RunConfig::real(const std::string &key) const {
  return parse_number<double>(key, text(key), "a number");
}

bool RunConfig::boolean(const std::string &key) const {
  const std::string v = text(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true or false");
}

std::vector<double> RunConfig::reals(const std::string &key) const {
  std::vector<double> out;
  const std::string v = text(key);
  if (v.empty()) return out;
  for (const auto &item : split_list(v)) out.push_back(parse_number<double>(key, item, "a list of numbers"));
  return out;
}

std::vector<Index> RunConfig::indices(const std::string &key) const {
  std::vector<Index> out;
  const std::string v = text(key);
  if (v.empty()) return out;
  for (const auto &item : split_list(v)) {
    out.push_back(parse_number<Index>(key, item, "a list of integers"));
  }
  return out;
}

std::string RunConfig::resolved() const {
  std::ostringstream out;
  // The output location is left out so that a run repeated elsewhere echoes
  // the same configuration.
  for (const auto &[key, fallback] : defaults()) {
    if (key != "out") out << key << '=' << text(key) << '\n';
  }
  return out.str();
}

}  // namespace eflow::cli
