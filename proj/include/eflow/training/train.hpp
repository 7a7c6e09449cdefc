#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "eflow/flows/model.hpp"
#include "eflow/losses/loss_spec.hpp"
#include "eflow/training/adam.hpp"

namespace eflow::training {

struct TrainConfig {
  losses::LossSpec objective;
  double learning_rate = 1e-3;
  Index batch_size = 200;
  Index epochs = 1;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  /// Epochs between checkpoint callbacks; 0 disables them.
  Index checkpoint_every = 0;
  /// Model samples drawn per data row for the per-datum objectives.
  Index samples_per_datum = 8;
  /// Global gradient norm bound; 0 disables clipping.
  double clip_norm = 100.0;
  /// Only bias parameters are updated.
  bool bias_only = false;

  AdamConfig adam() const;
  void validate() const;
};

struct EpochRecord {
  Index epoch = 0;
  double loss = 0.0;
  double wallclock_ms = 0.0;
};

struct TrainResult {
  flows::FlowModel model;
  std::vector<EpochRecord> history;
  AdamState adam;
};

/// Called after every checkpoint_every-th epoch with the current state.
using CheckpointFn = std::function<void(const flows::FlowModel &, const AdamState &, const EpochRecord &)>;

/// Minimizes the configured two-sample objective. Steps walk a fresh
/// shuffle of the rows each epoch; the last batch of an epoch may be short.
/// `resume` continues from a saved optimizer state.
TrainResult train_energy(flows::FlowModel model, const Matrix &data, const TrainConfig &cfg,
                         const CheckpointFn &checkpoint = {},
                         std::optional<AdamState> resume = std::nullopt);

/// Minimizes the mean negative log-likelihood of an invertible model.
TrainResult train_loglik(flows::FlowModel model, const Matrix &data, const TrainConfig &cfg,
                         const CheckpointFn &checkpoint = {},
                         std::optional<AdamState> resume = std::nullopt);

}  // namespace eflow::training
