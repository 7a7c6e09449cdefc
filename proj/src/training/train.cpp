#include "eflow/training/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "eflow/core/error.hpp"
#include "eflow/core/rng.hpp"
#include "eflow/diffcore/ops.hpp"
#include "eflow/training/objective.hpp"

namespace eflow::training {

namespace ops = diffcore;

AdamConfig TrainConfig::adam() const {
  return AdamConfig{learning_rate, adam_beta1, adam_beta2, adam_eps};
}

void TrainConfig::validate() const {
  objective.validate();
  adam().validate();
  require(batch_size >= 1, ErrorKind::config, "batch size must be >= 1");
  require(epochs >= 0, ErrorKind::config, "epochs must be >= 0");
  require(checkpoint_every >= 0, ErrorKind::config, "checkpoint interval must be >= 0");
  require(samples_per_datum >= 2, ErrorKind::config, "samples per datum must be >= 2");
  require(clip_norm >= 0.0, ErrorKind::config, "clip norm must be >= 0");
  if (objective.pairing == losses::Pairing::paired && samples_per_datum % 2 != 0) {
    raise(ErrorKind::config, "paired estimation needs an even number of samples per datum");
  }
}

namespace {

using LossFn = std::function<Tensor(std::span<const Tensor>, const Matrix &batch)>;

Matrix gather(const Matrix &data, const std::vector<Index> &order, Index from, Index count) {
  Matrix out(count, data.cols());
  for (Index i = 0; i < count; ++i) out.row(i) = data.row(order[from + i]);
  return out;
}

/// Shared loop: shuffling, tape, clipping, masking, Adam and history.
/// `make_loss` is called once per step with a fresh set of parameters.
TrainResult run(flows::FlowModel model, const Matrix &data, const TrainConfig &cfg,
                const CheckpointFn &checkpoint, std::optional<AdamState> resume,
                const std::function<Tensor(const flows::FlowModel &, std::span<const Tensor>,
                                           const Matrix &)> &make_loss,
                const char *failure_unit) {
  TrainResult result{std::move(model), {}, {}};
  auto params = flows::parameters(result.model);
  result.adam = resume ? std::move(*resume) : AdamState::zeros(params);
  if (result.adam.first_moment.size() != params.size()) {
    raise(ErrorKind::contract, "optimizer state does not match the model parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (result.adam.first_moment[i].rows() != params[i]->rows() ||
        result.adam.first_moment[i].cols() != params[i]->cols()) {
      raise(ErrorKind::contract, "optimizer state does not match the model parameters");
    }
  }
  const std::vector<bool> bias = flows::bias_mask(result.model);
  const AdamConfig adam = cfg.adam();
  const Index n = data.rows();
  require(n >= 1, ErrorKind::sample_size, "training needs at least one data row");

  Engine shuffle = SeedStream(cfg.seed).engine("batch");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::uint64_t step = 0;
  for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), shuffle);
    double loss_sum = 0.0;
    Index batches = 0;
    for (Index from = 0; from < n; from += cfg.batch_size, ++step) {
      const Matrix batch = gather(data, order, from, std::min(cfg.batch_size, n - from));
      std::vector<Matrix> grads;
      double value = 0.0;
      try {
        diffcore::Tape tape;
        std::vector<Tensor> leaves;
        leaves.reserve(params.size());
        for (const Matrix *p : params) leaves.push_back(tape.parameter(*p));
        const Tensor loss = make_loss(result.model, leaves, batch);
        value = loss.scalar();
        require(std::isfinite(value), ErrorKind::numeric, "loss is not finite");
        const auto map = tape.backward(loss);
        for (std::size_t i = 0; i < leaves.size(); ++i) {
          grads.push_back(cfg.bias_only && !bias[i] ? Matrix::Zero(params[i]->rows(), params[i]->cols())
                                                     : map.get(leaves[i]));
        }
        if (cfg.clip_norm > 0.0) clip_global_norm(grads, cfg.clip_norm);
        adam_step(params, grads, result.adam, adam);
      } catch (const Error &e) {
        if (e.kind() != ErrorKind::numeric && e.kind() != ErrorKind::domain &&
            e.kind() != ErrorKind::singular) {
          throw;
        }
        raise(e.kind(), std::string(failure_unit) + " " + std::to_string(step) + ": " + e.message());
      }
      loss_sum += value;
      ++batches;
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back({epoch, loss_sum / static_cast<double>(batches), ms});
    if (checkpoint && cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
      checkpoint(result.model, result.adam, result.history.back());
    }
  }
  return result;
}

}  // namespace

TrainResult train_energy(flows::FlowModel model, const Matrix &data, const TrainConfig &cfg,
                         const CheckpointFn &checkpoint, std::optional<AdamState> resume) {
  cfg.validate();
  flows::validate(model);
  check_objective(model, cfg.objective, data.cols());
  const SeedStream seeds(cfg.seed);
  Engine noise = seeds.engine("noise");
  Engine slice = seeds.engine("slice", cfg.objective.slice ? cfg.objective.slice->seed : 0);
  const auto loss = [&](const flows::FlowModel &m, std::span<const Tensor> params, const Matrix &batch) {
    const StepDraws draws =
        draw_step(m, cfg.objective, batch.rows(), cfg.samples_per_datum, noise, slice);
    return step_loss(m, params, batch, draws, cfg.objective, cfg.samples_per_datum);
  };
  return run(std::move(model), data, cfg, checkpoint, std::move(resume), loss, "step");
}

TrainResult train_loglik(flows::FlowModel model, const Matrix &data, const TrainConfig &cfg,
                         const CheckpointFn &checkpoint, std::optional<AdamState> resume) {
  cfg.validate();
  flows::validate(model);
  if (!flows::is_invertible(model)) {
    raise(ErrorKind::capability, "log-likelihood training needs an invertible model");
  }
  if (flows::data_dim(model) != data.cols()) {
    raise(ErrorKind::dimension, "model dimension " + std::to_string(flows::data_dim(model)) +
                                    " does not match data dimension " + std::to_string(data.cols()));
  }
  const auto loss = [](const flows::FlowModel &m, std::span<const Tensor> params, const Matrix &batch) {
    if (const auto *dif = std::get_if<flows::DenseInvertibleFlow>(&m)) {
      return ops::neg(ops::mean(flows::dif_log_likelihood(*dif, params, Tensor(batch))));
    }
    const auto &saef = std::get<flows::SemiAutoregressiveFlow>(m);
    return ops::neg(ops::mean(flows::saef_log_likelihood(saef, params, batch)));
  };
  return run(std::move(model), data, cfg, checkpoint, std::move(resume), loss, "batch");
}

}  // namespace eflow::training
