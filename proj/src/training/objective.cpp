#include "eflow/training/objective.hpp"

#include <random>

#include <boost/math/distributions/normal.hpp>

#include "eflow/core/error.hpp"
#include "eflow/diffcore/ops.hpp"
#include "eflow/losses/energy.hpp"
#include "eflow/losses/scores.hpp"
#include "eflow/losses/sliced.hpp"
#include "eflow/losses/statistics.hpp"

namespace eflow::training {

namespace ops = diffcore;
using losses::Objective;

namespace {

losses::KernelSpec score_kernel(const losses::LossSpec &spec) {
  return spec.objective == Objective::kernelized_energy ? spec.kernel
                                                        : losses::KernelSpec::euclidean(spec.kernel.beta);
}

bool uses_model_groups(const flows::FlowModel &model, const losses::LossSpec &spec) {
  return spec.is_per_datum() || (std::holds_alternative<flows::SemiAutoregressiveFlow>(model) &&
                                 spec.objective == Objective::sliced_energy);
}

flows::FlowOutput forward(const flows::FlowModel &model, std::span<const Tensor> params,
                          const Tensor &z) {
  if (const auto *dif = std::get_if<flows::DenseInvertibleFlow>(&model)) {
    return flows::dif_forward(*dif, params, z);
  }
  return flows::ref_forward(std::get<flows::RectangularFlow>(model), params, z);
}

Matrix repeat(const Matrix &x, Index k) {
  Matrix out(x.rows() * k, x.cols());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index r = 0; r < k; ++r) out.row(i * k + r) = x.row(i);
  return out;
}

}  // namespace

void check_objective(const flows::FlowModel &model, const losses::LossSpec &spec, Index data_dim) {
  spec.validate();
  if (flows::data_dim(model) != data_dim) {
    raise(ErrorKind::dimension, "model dimension " + std::to_string(flows::data_dim(model)) +
                                    " does not match data dimension " + std::to_string(data_dim));
  }
  const bool saef = std::holds_alternative<flows::SemiAutoregressiveFlow>(model);
  if (saef && !spec.is_per_datum() && spec.objective != Objective::sliced_energy) {
    raise(ErrorKind::config, "objective " + losses::to_string(spec.objective) +
                                 " is not supported for saef models");
  }
  if (spec.objective == Objective::quantile &&
      (data_dim != 1 || flows::latent_dim(model) != 1 || saef)) {
    raise(ErrorKind::config, "the quantile objective needs a one-dimensional dif or ref model");
  }
}

StepDraws draw_step(const flows::FlowModel &model, const losses::LossSpec &spec, Index batch_rows,
                    Index samples_per_datum, Engine &noise, Engine &slice) {
  StepDraws draws;
  const Index latent = flows::latent_dim(model);
  if (spec.objective == Objective::quantile) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const boost::math::normal_distribution<double> normal;
    draws.latents.resize(batch_rows, 1);
    for (Index i = 0; i < batch_rows; ++i) {
      double tau = 0.0;
      while (tau <= 0.0) tau = unit(noise);
      draws.taus.push_back(tau);
      draws.latents(i, 0) = boost::math::quantile(normal, tau);
    }
    return draws;
  }
  const Index rows = uses_model_groups(model, spec) ? batch_rows * samples_per_datum : batch_rows;
  draws.latents = standard_normal(rows, latent, noise);
  if (spec.is_sliced()) {
    const int n = spec.slice->n_projections;
    if (const auto *saef = std::get_if<flows::SemiAutoregressiveFlow>(&model)) {
      // One projection set per block, stacked by rows.
      draws.projections.resize(saef->dim(), n);
      for (Index b = 0; b < saef->block_count(); ++b) {
        draws.projections.middleRows(saef->partition.start(b), saef->partition.sizes[b]) =
            losses::draw_projections(saef->partition.sizes[b], n, slice);
      }
    } else {
      draws.projections = losses::draw_projections(flows::data_dim(model), n, slice);
    }
  }
  return draws;
}

Tensor step_loss(const flows::FlowModel &model, std::span<const Tensor> params, const Matrix &batch,
                 const StepDraws &draws, const losses::LossSpec &spec, Index samples_per_datum,
                 flows::SaefStats *stats) {
  const Index k = samples_per_datum;
  if (const auto *saef = std::get_if<flows::SemiAutoregressiveFlow>(&model)) {
    const Matrix teacher = repeat(batch, k);
    const flows::SaefBlocks out =
        flows::saef_teacher_blocks(*saef, params, teacher, Tensor(draws.latents), stats);
    Tensor total = out.penalty;
    for (Index b = 0; b < saef->block_count(); ++b) {
      const Index start = saef->partition.start(b);
      const Index size = saef->partition.sizes[b];
      const Matrix data_block = batch.middleCols(start, size);
      if (spec.objective == Objective::sliced_energy) {
        const Matrix v = draws.projections.middleRows(start, size);
        total = ops::add(total, losses::grouped_energy_score(
                                    ops::matmul(out.blocks[b], Tensor(v)), data_block * v, k,
                                    score_kernel(spec), spec.pairing, losses::Distance::per_coordinate));
      } else {
        total = ops::add(total, losses::grouped_energy_score(out.blocks[b], data_block, k,
                                                             score_kernel(spec), spec.pairing));
      }
    }
    return total;
  }

  const flows::FlowOutput out = forward(model, params, Tensor(draws.latents));
  Tensor loss;
  switch (spec.objective) {
    case Objective::energy:
    case Objective::kernelized_energy:
      loss = losses::grouped_energy_score(out.y, batch, k, score_kernel(spec), spec.pairing);
      break;
    case Objective::sliced_energy:
    case Objective::sliced_ks:
    case Objective::sliced_hotelling:
    case Objective::sliced_frechet:
      loss = losses::sliced_loss(losses::slice_base_for(spec.objective), out.y, batch,
                                 draws.projections, spec.kernel.beta);
      break;
    case Objective::hotelling:
      loss = losses::hotelling_statistic(out.y, Tensor(batch));
      break;
    case Objective::frechet:
      loss = losses::frechet_statistic(out.y, Tensor(batch));
      break;
    case Objective::quantile: {
      loss = losses::check_score_loss(out.y, draws.taus, batch);
      break;
    }
  }
  return ops::add(loss, out.penalty);
}

}  // namespace eflow::training
