#include "eflow/metrics/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>

#include "eflow/core/error.hpp"
#include "eflow/core/rng.hpp"
#include "eflow/data/csv.hpp"
#include "eflow/losses/mmd.hpp"
#include "eflow/metrics/crps.hpp"
#include "eflow/metrics/svm.hpp"

namespace eflow::metrics {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Index default_n_gen(const EvalConfig &cfg, Index rows) {
  return cfg.n_gen > 0 ? cfg.n_gen : std::min<Index>(1000, rows);
}

}  // namespace

MetricsReport evaluate_samples(const Matrix &model_samples, const Matrix &data,
                               const EvalConfig &cfg) {
  require(model_samples.cols() == data.cols(), ErrorKind::dimension,
          "model samples and data have different widths");
  require(data.rows() >= 2 && model_samples.rows() >= 2, ErrorKind::sample_size,
          "evaluation needs at least two samples and two data rows");
  MetricsReport report;
  report.sample_count = model_samples.rows();
  report.data_count = data.rows();

  auto start = Clock::now();
  const RowVector per_dim = crps_per_dimension(model_samples, data);
  report.crps = per_dim.sum();
  report.u_crps = per_dim.mean();
  report.wallclock.crps_ms = ms_since(start);

  start = Clock::now();
  const Index mmd_rows = std::min<Index>(data.rows(), 1000);
  report.mmd2 = losses::mmd_squared(model_samples, data.topRows(mmd_rows), cfg.mmd_kernel);
  report.wallclock.mmd_ms = ms_since(start);

  start = Clock::now();
  const Index per_class = std::min({cfg.d_loss_per_class, data.rows(), model_samples.rows()});
  report.d_loss_count = per_class;
  // A seeded subset of the data, in case the rows are ordered.
  std::vector<Index> rows(static_cast<std::size_t>(data.rows()));
  std::iota(rows.begin(), rows.end(), Index{0});
  Engine pick = SeedStream(cfg.seed).engine("dloss_rows");
  std::shuffle(rows.begin(), rows.end(), pick);
  Matrix real(per_class, data.cols());
  for (Index i = 0; i < per_class; ++i) real.row(i) = data.row(rows[i]);
  report.d_loss = d_loss(real, model_samples.topRows(per_class), cfg.seed).d_loss;
  report.wallclock.d_loss_ms = ms_since(start);
  return report;
}

MetricsReport evaluate(const flows::FlowModel &model, const Matrix &data, const EvalConfig &cfg) {
  require(flows::data_dim(model) == data.cols(), ErrorKind::dimension,
          "model and data dimensions differ");
  const SeedStream seeds(cfg.seed);
  const Index n_gen = default_n_gen(cfg, data.rows());
  Engine noise = seeds.engine("eval");
  const Matrix z = standard_normal(n_gen, flows::latent_dim(model), noise);
  auto start = Clock::now();
  const Matrix samples = flows::generate(model, z);
  const double sampling_ms = ms_since(start);

  MetricsReport report = evaluate_samples(samples, data, cfg);
  report.wallclock.sampling_ms_per_1000 = sampling_ms * 1000.0 / static_cast<double>(n_gen);
  if (flows::is_invertible(model)) {
    start = Clock::now();
    report.nll = -flows::log_likelihood(model, data).mean();
    report.wallclock.nll_ms = ms_since(start);
  }
  return report;
}

void write_report(std::ostream &out, const MetricsReport &report, const std::string &run_id,
                  std::uint64_t seed) {
  using data::format_double;
  out << "run_id=" << run_id << '\n'
      << "seed=" << seed << '\n'
      << "crps=" << format_double(report.crps) << '\n'
      << "u_crps=" << format_double(report.u_crps) << '\n'
      << "mmd2=" << format_double(report.mmd2) << '\n'
      << "nll=" << (report.nll ? format_double(*report.nll) : "NA") << '\n'
      << "d_loss=" << format_double(report.d_loss) << '\n'
      << "sample_count=" << report.sample_count << '\n'
      << "data_count=" << report.data_count << '\n'
      << "d_loss_count=" << report.d_loss_count << '\n'
      << "sampling_ms_per_1000=" << format_double(report.wallclock.sampling_ms_per_1000) << '\n'
      << "crps_ms=" << format_double(report.wallclock.crps_ms) << '\n'
      << "mmd_ms=" << format_double(report.wallclock.mmd_ms) << '\n'
      << "d_loss_ms=" << format_double(report.wallclock.d_loss_ms) << '\n'
      << "nll_ms=" << format_double(report.wallclock.nll_ms) << '\n';
}

void append_ledger(const std::string &path, const MetricsReport &report, const std::string &run_id,
                   std::uint64_t seed) {
  std::ofstream out(path, std::ios::app);
  if (!out) raise(ErrorKind::ingestion, "cannot open ledger " + path);
  write_report(out, report, run_id, seed);
  out << '\n';
}

}  // namespace eflow::metrics
