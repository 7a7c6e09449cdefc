#include "eflow/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "eflow/core/error.hpp"
#include "eflow/core/rng.hpp"
#include "eflow/data/csv.hpp"
#include "eflow/data/synth.hpp"
#include "eflow/flows/serialize.hpp"
#include "eflow/metrics/crps.hpp"
#include "eflow/metrics/evaluate.hpp"

namespace eflow::cli {

namespace fs = std::filesystem;
using data::format_double;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void write_file(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorKind::ingestion, "cannot write " + path.string());
  out << text;
}

void make_dir(const std::string &dir) {
  if (dir.empty()) raise(ErrorKind::config, "config key 'out' is required (or pass --out)");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) raise(ErrorKind::ingestion, "cannot create output directory " + dir + ": " + ec.message());
}

std::vector<std::string> prefixed_names(const char *prefix, Index d) {
  std::vector<std::string> names;
  for (Index j = 0; j < d; ++j) names.push_back(prefix + std::to_string(j));
  return names;
}

flows::OptimizerSection to_section(const training::AdamState &s) {
  return {s.step, s.first_moment, s.second_moment};
}

flows::ModelFile load_model_file(const std::string &path) {
  if (path.empty()) raise(ErrorKind::config, "--model is required");
  return flows::load_model(path);
}

Matrix load_points(const std::string &path, bool header, const char *what) {
  if (path.empty()) raise(ErrorKind::config, std::string(what) + " is required");
  return data::load_csv(path, header).points;
}

std::uint64_t fnv1a(const std::string &text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Trains one comparison row and scores it on the test split in model space.
CompareRow run_row(const RunConfig &cfg, const PreparedData &prepared,
                   const flows::FlowModel &init, const std::string &key) {
  const std::uint64_t base = cfg.unsigned_integer("seed");
  training::TrainConfig tc = build_train(cfg);
  tc.seed = row_seed(base, key);
  CompareRow row;
  row.key = key;
  const auto start = Clock::now();
  const training::TrainResult result = training::train_energy(init, prepared.model.train.points, tc);
  row.train_ms = ms_since(start);
  row.final_loss = result.history.empty() ? 0.0 : result.history.back().loss;
  // As many model samples as the evaluation protocol uses, capped by the training size.
  const Index n_gen = cfg.integer("n_gen") > 0
                          ? static_cast<Index>(cfg.integer("n_gen"))
                          : std::min<Index>(1000, prepared.model.train.size());
  Engine noise = SeedStream(tc.seed).engine("eval");
  const Matrix samples =
      flows::generate(result.model, standard_normal(n_gen, flows::latent_dim(result.model), noise));
  const RowVector per_dim = metrics::crps_per_dimension(samples, prepared.model.test.points);
  row.crps = per_dim.sum();
  row.u_crps = per_dim.mean();
  return row;
}

void print_rows(std::ostream &out, const char *key_title, std::vector<CompareRow> rows, bool rank) {
  if (rank) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const CompareRow &a, const CompareRow &b) { return a.crps < b.crps; });
  }
  out << std::left << std::setw(6) << (rank ? "rank" : "row") << std::setw(18) << key_title
      << std::setw(24) << "crps" << std::setw(24) << "u_crps" << std::setw(24) << "final_loss"
      << "train_s\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto &r = rows[i];
    out << std::left << std::setw(6) << (i + 1) << std::setw(18) << r.key << std::setw(24)
        << format_double(r.crps) << std::setw(24) << format_double(r.u_crps) << std::setw(24)
        << format_double(r.final_loss) << std::fixed << std::setprecision(2) << r.train_ms / 1000.0
        << std::defaultfloat << '\n';
  }
}

void write_rows(const std::string &dir, const std::string &file, const char *key_title,
                const std::vector<CompareRow> &rows) {
  if (dir.empty()) return;
  make_dir(dir);
  std::ostringstream csv;
  csv << key_title << ",crps,u_crps,final_loss\n";
  for (const auto &r : rows) {
    csv << r.key << ',' << format_double(r.crps) << ',' << format_double(r.u_crps) << ','
        << format_double(r.final_loss) << '\n';
  }
  write_file(fs::path(dir) / file, csv.str());
}

std::string out_dir_of(const RunConfig &cfg, const std::string &flag) {
  return flag.empty() ? cfg.text("out") : flag;
}

}  // namespace

std::uint64_t row_seed(std::uint64_t base, const std::string &key) {
  return splitmix64(base ^ fnv1a(key));
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
      return 2;
    case ErrorKind::ingestion:
    case ErrorKind::format:
    case ErrorKind::dimension:
    case ErrorKind::sample_size:
      return 3;
    case ErrorKind::numeric:
    case ErrorKind::singular:
    case ErrorKind::domain:
      return 4;
    case ErrorKind::capability:
      return 5;
    case ErrorKind::contract:
      return 1;
  }
  return 1;
}

data::Dataset load_raw_dataset(const RunConfig &cfg) {
  const std::string path = cfg.text("data");
  const std::string synth = cfg.text("synth");
  if (!path.empty() && !synth.empty()) {
    raise(ErrorKind::config, "config keys 'data' and 'synth' are mutually exclusive");
  }
  data::Dataset ds;
  if (!path.empty()) {
    try {
      ds = data::load_csv(path, cfg.boolean("header"));
    } catch (const Error &e) {
      raise(e.kind(), std::string("config key 'data': ") + e.message());
    }
  } else if (!synth.empty()) {
    const auto n = cfg.integer("synth_n");
    require(n >= 1, ErrorKind::config, "config key 'synth_n' must be >= 1");
    const std::uint64_t seed = cfg.unsigned_integer("synth_seed");
    ds = data::synth(data::parse_synth(synth), n, seed);
  } else {
    raise(ErrorKind::config, "config key 'data' is required (or set 'synth')");
  }
  if (const auto d = cfg.integer("embed_dim"); d > 0) {
    const std::uint64_t seed = row_seed(cfg.unsigned_integer("synth_seed"), "embed");
    ds = data::embed(ds, d, cfg.real("embed_noise"), seed);
  }
  return ds;
}

PreparedData prepare_data(const RunConfig &cfg) {
  const data::Dataset raw = load_raw_dataset(cfg);
  const data::SplitSpec spec{cfg.real("split_train"), cfg.real("split_val"), cfg.real("split_test"),
                             cfg.unsigned_integer("split_seed")};
  PreparedData out;
  out.raw = data::split(raw, spec);
  data::Dataset train = out.raw.train;
  if (cfg.boolean("standardize")) {
    const std::string policy = cfg.text("constant_columns");
    if (policy != "error" && policy != "drop") {
      raise(ErrorKind::config, "config key 'constant_columns': expected error or drop");
    }
    train = data::standardize(train, policy == "drop" ? data::ConstantColumns::drop
                                                      : data::ConstantColumns::error);
  }
  if (const auto order = cfg.indices("column_order"); !order.empty()) {
    train = data::permute_columns(train, order);
  }
  out.transform = train.transform;
  out.model.train = train;
  out.model.val = data::apply_transform(out.raw.val, out.transform);
  out.model.test = data::apply_transform(out.raw.test, out.transform);
  return out;
}

flows::FlowModel build_model(const RunConfig &cfg, Index dim, std::uint64_t seed) {
  Engine init = SeedStream(seed).engine("init");
  flows::DifConfig dif;
  dif.dim = dim;
  dif.layers = static_cast<int>(cfg.integer("layers"));
  dif.hidden = flows::parse_activation(cfg.text("hidden_activation"));
  dif.final = flows::parse_activation(cfg.text("final_activation"));
  dif.sigma = cfg.real("sigma");
  dif.activity_weight = cfg.real("activity_weight");
  dif.leaky_alpha = cfg.real("leaky_alpha");
  dif.init_scale = cfg.real("init_scale");
  switch (flows::parse_architecture(cfg.text("arch"))) {
    case flows::Architecture::dif:
      return flows::make_dif(dif, init);
    case flows::Architecture::ref: {
      flows::RefConfig ref;
      const auto widths = cfg.indices("ref_widths");
      ref.widths = widths.empty() ? flows::default_ref_widths(dim) : widths;
      if (ref.widths.back() != dim) {
        raise(ErrorKind::config, "config key 'ref_widths': last width must equal the data dimension " +
                                     std::to_string(dim));
      }
      ref.hidden = dif.hidden;
      ref.final = dif.final;
      ref.activity_weight = dif.activity_weight;
      ref.leaky_alpha = dif.leaky_alpha;
      return flows::make_ref(ref, init);
    }
    case flows::Architecture::saef: {
      flows::SaefConfig saef;
      saef.dim = dim;
      saef.blocks = static_cast<Index>(cfg.integer("blocks"));
      if (saef.blocks < 1 || saef.blocks > dim) {
        raise(ErrorKind::config, "config key 'blocks' must lie in [1, " + std::to_string(dim) + "]");
      }
      saef.transformer = dif;
      saef.cond_init_scale = cfg.real("cond_init_scale");
      return flows::make_saef(saef, init);
    }
  }
  raise(ErrorKind::config, "unknown architecture");
}

losses::LossSpec build_loss(const RunConfig &cfg) {
  losses::LossSpec spec;
  spec.objective = losses::parse_objective(cfg.text("objective"));
  spec.pairing = losses::parse_pairing(cfg.text("pairing"));
  const bool kernelized = spec.objective == losses::Objective::kernelized_energy;
  const auto kind = cfg.given("kernel") || !kernelized ? losses::parse_kernel_kind(cfg.text("kernel"))
                                                       : losses::KernelKind::rbf_mixture;
  switch (kind) {
    case losses::KernelKind::euclidean_beta:
      spec.kernel = losses::KernelSpec::euclidean(cfg.real("beta"));
      break;
    case losses::KernelKind::rbf:
      spec.kernel = losses::KernelSpec::rbf(cfg.real("gamma"));
      break;
    case losses::KernelKind::rbf_mixture:
      spec.kernel = losses::KernelSpec::rbf_mixture(cfg.reals("bandwidths"));
      break;
  }
  if (spec.is_sliced()) {
    spec.slice = losses::SliceConfig{static_cast<int>(cfg.integer("projections")),
                                     losses::ProjectionLaw::standard_normal,
                                     cfg.unsigned_integer("slice_seed")};
  }
  spec.validate();
  return spec;
}

training::TrainConfig build_train(const RunConfig &cfg) {
  training::TrainConfig tc;
  tc.objective = build_loss(cfg);
  tc.learning_rate = cfg.real("learning_rate");
  tc.batch_size = static_cast<Index>(cfg.integer("batch_size"));
  tc.epochs = static_cast<Index>(cfg.integer("epochs"));
  tc.seed = cfg.unsigned_integer("seed");
  tc.adam_beta1 = cfg.real("adam_beta1");
  tc.adam_beta2 = cfg.real("adam_beta2");
  tc.adam_eps = cfg.real("adam_eps");
  tc.checkpoint_every = static_cast<Index>(cfg.integer("checkpoint_every"));
  tc.samples_per_datum = static_cast<Index>(cfg.integer("samples_per_datum"));
  tc.clip_norm = cfg.real("clip_norm");
  tc.bias_only = cfg.boolean("bias_only");
  tc.validate();
  return tc;
}

void cmd_train(const TrainArgs &args, std::ostream &out) {
  const RunConfig &cfg = args.config;
  const std::string dir = out_dir_of(cfg, args.out_dir);
  const std::string trainer = cfg.text("trainer");
  if (trainer != "energy" && trainer != "loglik") {
    raise(ErrorKind::config, "config key 'trainer': expected energy or loglik");
  }
  const training::TrainConfig tc = build_train(cfg);
  const PreparedData prepared = prepare_data(cfg);
  const flows::FlowModel init = build_model(cfg, prepared.model.train.dim(), tc.seed);
  make_dir(dir);
  write_file(fs::path(dir) / "resolved_config.txt", cfg.resolved());

  const fs::path log_path = fs::path(dir) / "run.log";
  write_file(log_path, "");
  const auto checkpoint = [&](const flows::FlowModel &m, const training::AdamState &adam,
                              const training::EpochRecord &e) {
    flows::save_model((fs::path(dir) / ("checkpoint_epoch_" + std::to_string(e.epoch) + ".eflw")).string(),
                      {m, prepared.transform, to_section(adam)});
  };
  const auto logged = [&](const flows::FlowModel &m, const training::AdamState &adam,
                          const training::EpochRecord &e) {
    std::ofstream log(log_path, std::ios::app);
    log << e.epoch << ',' << format_double(e.loss) << ',' << format_double(e.wallclock_ms) << '\n';
    if (tc.checkpoint_every > 0 && e.epoch % tc.checkpoint_every == 0) checkpoint(m, adam, e);
  };
  // The callback runs every epoch for the log; checkpoints keep their own schedule.
  training::TrainConfig every = tc;
  every.checkpoint_every = 1;
  const training::TrainResult result =
      trainer == "energy" ? training::train_energy(init, prepared.model.train.points, every, logged)
                          : training::train_loglik(init, prepared.model.train.points, every, logged);
  if (flows::is_invertible(result.model)) flows::check_nonsingular(result.model);

  flows::save_model((fs::path(dir) / "model.eflw").string(),
                    {result.model, prepared.transform, to_section(result.adam)});
  std::ostringstream history;
  history << "epoch,loss\n";
  for (const auto &e : result.history) history << e.epoch << ',' << format_double(e.loss) << '\n';
  write_file(fs::path(dir) / "history.csv", history.str());
  const auto names = prepared.raw.test.names.empty() ? data::default_names(prepared.raw.test.dim())
                                                     : prepared.raw.test.names;
  data::save_csv((fs::path(dir) / "train.csv").string(), prepared.raw.train.points, names);
  data::save_csv((fs::path(dir) / "test.csv").string(), prepared.raw.test.points, names);

  out << "model=" << (fs::path(dir) / "model.eflw").string() << '\n'
      << "epochs=" << result.history.size() << '\n'
      << "steps=" << result.adam.step << '\n';
  if (!result.history.empty()) out << "final_loss=" << format_double(result.history.back().loss) << '\n';
}

void cmd_sample(const SampleArgs &args, std::ostream &out) {
  const flows::ModelFile file = load_model_file(args.model_path);
  if (args.out_csv.empty()) raise(ErrorKind::config, "--out is required");
  Matrix z;
  if (!args.from_latents.empty()) {
    z = data::load_csv(args.from_latents, true).points;
    if (z.cols() != flows::latent_dim(file.model)) {
      raise(ErrorKind::dimension, "latent file has " + std::to_string(z.cols()) +
                                      " columns, the model expects " +
                                      std::to_string(flows::latent_dim(file.model)));
    }
  } else {
    require(args.n >= 0, ErrorKind::config, "--n must be >= 0");
    Engine noise = SeedStream(args.seed).engine("sample");
    z = standard_normal(args.n, flows::latent_dim(file.model), noise);
  }
  flows::SaefStats stats;
  const auto start = Clock::now();
  const Matrix y = flows::generate(file.model, z, &stats);
  const double ms = ms_since(start);
  const Matrix raw = file.transform.to_raw(y);
  data::save_csv(args.out_csv, raw, data::default_names(raw.cols()));
  out << "samples=" << raw.rows() << '\n';
  if (z.rows() > 0) out << "ms_per_1000=" << format_double(ms * 1000.0 / static_cast<double>(z.rows())) << '\n';
  if (std::holds_alternative<flows::SemiAutoregressiveFlow>(file.model)) {
    out << "conditioner_calls=" << stats.conditioner_calls << '\n';
    if (z.rows() > 0) {
      out << "conditioner_calls_per_sample="
          << format_double(static_cast<double>(stats.conditioner_calls) / static_cast<double>(z.rows()))
          << '\n';
    }
  }
}

void cmd_invert(const InvertArgs &args, std::ostream &out) {
  const flows::ModelFile file = load_model_file(args.model_path);
  if (args.out_csv.empty()) raise(ErrorKind::config, "--out is required");
  if (!flows::is_invertible(file.model)) {
    raise(ErrorKind::capability, "rectangular flows have no inverse");
  }
  const Matrix y = file.transform.to_model(load_points(args.data_csv, args.header, "--data"));
  if (!args.interpolate.empty()) {
    if (args.interpolate.size() != 2) raise(ErrorKind::config, "--interpolate takes two row indices");
    for (Index r : args.interpolate) {
      if (r < 0 || r >= y.rows()) {
        raise(ErrorKind::config, "--interpolate row " + std::to_string(r) + " is out of range");
      }
    }
    if (args.steps < 2) raise(ErrorKind::config, "--steps must be >= 2");
    const Matrix path =
        flows::latent_interpolate(file.model, y.row(args.interpolate[0]), y.row(args.interpolate[1]), args.steps);
    const Matrix raw = file.transform.to_raw(path);
    data::save_csv(args.out_csv, raw, data::default_names(raw.cols()));
    out << "points=" << raw.rows() << '\n';
    return;
  }
  const Matrix z = flows::invert(file.model, y);
  data::save_csv(args.out_csv, z, prefixed_names("z", z.cols()));
  out << "latents=" << z.rows() << '\n';
}

void cmd_evaluate(const EvaluateArgs &args, std::ostream &out) {
  metrics::EvalConfig ecfg;
  ecfg.seed = args.seed;
  ecfg.n_gen = args.n_gen;
  ecfg.d_loss_per_class = args.d_loss_per_class;
  metrics::MetricsReport report;
  std::string run_id;
  const Matrix data = load_points(args.data_csv, args.header, "--data");
  if (!args.samples_csv.empty()) {
    if (!args.model_path.empty()) raise(ErrorKind::config, "--model and --samples are mutually exclusive");
    report = metrics::evaluate_samples(load_points(args.samples_csv, args.header, "--samples"), data, ecfg);
    run_id = fs::path(args.samples_csv).stem().string();
  } else {
    const flows::ModelFile file = load_model_file(args.model_path);
    report = metrics::evaluate(file.model, file.transform.to_model(data), ecfg);
    run_id = fs::path(args.model_path).stem().string();
  }
  std::ostringstream block;
  metrics::write_report(block, report, run_id, args.seed);
  std::istringstream lines(block.str());
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    out << std::left << std::setw(22) << line.substr(0, eq) << line.substr(eq + 1) << '\n';
  }
  if (!args.ledger.empty()) metrics::append_ledger(args.ledger, report, run_id, args.seed);
}

std::vector<CompareRow> cmd_losscmp(const LossCmpArgs &args, std::ostream &out) {
  if (args.objectives.size() < 2) raise(ErrorKind::config, "losscmp needs at least two objectives");
  const PreparedData prepared = prepare_data(args.config);
  const flows::FlowModel init =
      build_model(args.config, prepared.model.train.dim(), args.config.unsigned_integer("seed"));
  std::vector<CompareRow> rows;
  for (const auto &name : args.objectives) {
    RunConfig row_cfg = args.config;
    row_cfg.set("objective", name);
    const std::string key = losses::to_string(losses::parse_objective(name));
    rows.push_back(run_row(row_cfg, prepared, init, key));
  }
  print_rows(out, "objective", rows, true);
  write_rows(args.out_dir, "losscmp.csv", "objective", rows);
  return rows;
}

std::vector<CompareRow> cmd_slicecmp(const SliceCmpArgs &args, std::ostream &out) {
  if (args.projections.empty()) raise(ErrorKind::config, "slicecmp needs at least one projection count");
  const PreparedData prepared = prepare_data(args.config);
  const flows::FlowModel init =
      build_model(args.config, prepared.model.train.dim(), args.config.unsigned_integer("seed"));
  std::vector<CompareRow> rows;
  for (Index n : args.projections) {
    if (n < 1) raise(ErrorKind::config, "projection counts must be >= 1");
    RunConfig row_cfg = args.config;
    row_cfg.set("objective", "sliced_energy");
    row_cfg.set("projections", std::to_string(n));
    rows.push_back(run_row(row_cfg, prepared, init, "sliced_energy:" + std::to_string(n)));
    rows.back().key = std::to_string(n);
  }
  RunConfig full = args.config;
  full.set("objective", "energy");
  full.set("kernel", "euclidean");
  rows.push_back(run_row(full, prepared, init, "energy"));
  rows.back().key = "full";
  print_rows(out, "projections", rows, false);
  write_rows(args.out_dir, "slicecmp.csv", "projections", rows);
  return rows;
}

}  // namespace eflow::cli
