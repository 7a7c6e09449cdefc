#pragma once

#include <span>
#include <vector>

#include "eflow/core/rng.hpp"
#include "eflow/flows/model.hpp"
#include "eflow/losses/loss_spec.hpp"

namespace eflow::training {

using diffcore::Tensor;

/// Random inputs of one training step. Keeping them separate from the loss
/// makes the loss a deterministic function of parameters and batch.
struct StepDraws {
  /// Latent codes: (rows * k) x latent_dim for per-datum objectives,
  /// rows x latent_dim for batch objectives.
  Matrix latents;
  /// Quantile levels, quantile objective only.
  std::vector<double> taus;
  /// d x n_projections unit columns, sliced objectives only.
  Matrix projections;
};

/// Checks that the architecture supports the objective and the data width.
void check_objective(const flows::FlowModel &model, const losses::LossSpec &spec, Index data_dim);

StepDraws draw_step(const flows::FlowModel &model, const losses::LossSpec &spec, Index batch_rows,
                    Index samples_per_datum, Engine &noise, Engine &slice);

/// Training loss of one step, including the activity penalty.
///   energy / kernelized_energy: k model samples per data row, per-datum
///     score averaged over the batch (blockwise sum for SAEF, teacher forced).
///   sliced_energy on SAEF: the per-datum score of projected blocks.
///   other objectives: a batch of model samples against the data batch.
Tensor step_loss(const flows::FlowModel &model, std::span<const Tensor> params, const Matrix &batch,
                 const StepDraws &draws, const losses::LossSpec &spec, Index samples_per_datum,
                 flows::SaefStats *stats = nullptr);

}  // namespace eflow::training
