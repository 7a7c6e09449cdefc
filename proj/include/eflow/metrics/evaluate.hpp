#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "eflow/flows/model.hpp"
#include "eflow/losses/kernel.hpp"

namespace eflow::metrics {

struct EvalConfig {
  /// Model samples for CRPS and MMD; 0 means min(1000, data rows).
  Index n_gen = 0;
  /// Points per class for the discriminator; capped by the available rows.
  Index d_loss_per_class = 300;
  std::uint64_t seed = 0;
  losses::KernelSpec mmd_kernel = losses::KernelSpec::default_mixture();
};

struct PhaseTimes {
  double sampling_ms_per_1000 = 0.0;
  double crps_ms = 0.0;
  double mmd_ms = 0.0;
  double d_loss_ms = 0.0;
  double nll_ms = 0.0;
};

struct MetricsReport {
  double crps = 0.0;
  double u_crps = 0.0;
  double mmd2 = 0.0;
  /// Mean negative log-likelihood of the data; invertible models only.
  std::optional<double> nll;
  double d_loss = 0.0;
  Index sample_count = 0;
  Index data_count = 0;
  Index d_loss_count = 0;
  PhaseTimes wallclock;
};

/// Scores `model_samples` against `data` (both in the same space). NLL is
/// not computed here.
MetricsReport evaluate_samples(const Matrix &model_samples, const Matrix &data,
                               const EvalConfig &cfg);

/// Draws the model samples itself, adds the NLL for invertible models.
/// Does not modify the model.
MetricsReport evaluate(const flows::FlowModel &model, const Matrix &data, const EvalConfig &cfg);

/// Flat key=value lines, timings last.
void write_report(std::ostream &out, const MetricsReport &report, const std::string &run_id,
                  std::uint64_t seed);
/// Appends one record, followed by a blank line, to a ledger file.
void append_ledger(const std::string &path, const MetricsReport &report, const std::string &run_id,
                   std::uint64_t seed);

}  // namespace eflow::metrics
