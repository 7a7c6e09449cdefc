#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "eflow/flows/dif.hpp"

namespace eflow::flows {

/// Contiguous blocks covering 0..d-1 in generation order.
struct BlockPartition {
  std::vector<Index> sizes;

  /// B blocks of near-equal size; the first d mod B blocks get one extra column.
  static BlockPartition uniform(Index d, Index blocks);

  Index count() const { return static_cast<Index>(sizes.size()); }
  Index dim() const;
  Index start(Index block) const;
  void validate() const;
};

/// Maps the prefix y_{<b} to per-layer bias shifts h_b of block b's
/// transformer. Block 0 has no input; its shift is the learned row `b2`
/// and the other matrices are empty.
struct Conditioner {
  Matrix w1;
  Matrix b1;
  Matrix w2;
  Matrix b2;

  bool is_constant() const { return w1.size() == 0; }
};

struct SemiAutoregressiveFlow {
  BlockPartition partition;
  std::vector<Conditioner> conditioners;
  std::vector<DenseInvertibleFlow> transformers;

  Index dim() const { return partition.dim(); }
  Index block_count() const { return partition.count(); }
  void validate() const;
  /// Per block: conditioner matrices (b2 only for block 0, else w1, b1, w2,
  /// b2), then the transformer's parameters.
  std::vector<Matrix *> parameters();
  std::vector<Matrix> parameter_values() const;
};

struct SaefConfig {
  Index dim = 2;
  Index blocks = 1;
  /// Shape of every transformer; its dim is overridden by the block size.
  DifConfig transformer;
  /// Std of the first conditioner layer is cond_init_scale / sqrt(fan_in).
  /// The output layer starts at zero, so an untrained model has h_b = 0.
  double cond_init_scale = 1.0;
};

SemiAutoregressiveFlow make_saef(const SaefConfig &cfg, Engine &engine);

/// Instrumentation: one conditioner evaluation per sample per block.
struct SaefStats {
  std::uint64_t conditioner_calls = 0;
};

struct SaefBlocks {
  /// y_b for each block, rows aligned with z.
  std::vector<Tensor> blocks;
  Tensor penalty;
};

/// Teacher-forced forward: h_b = c_b(x_{<b}) from the given data rows, then
/// y_b = tau_b(z_b; h_b). Rows of x and z are aligned.
SaefBlocks saef_teacher_blocks(const SemiAutoregressiveFlow &model, std::span<const Tensor> params,
                               const Matrix &x, const Tensor &z, SaefStats *stats = nullptr);

/// Both latent copies pushed through each block with the same h_b.
std::vector<std::pair<Matrix, Matrix>> saef_forward_teacher(const SemiAutoregressiveFlow &model,
                                                            const Matrix &x, const Matrix &z,
                                                            const Matrix &z_prime,
                                                            SaefStats *stats = nullptr);

/// Blockwise generation conditioning on previously generated blocks.
Matrix saef_sample(const SemiAutoregressiveFlow &model, const Matrix &z, SaefStats *stats = nullptr);

Matrix saef_inverse(const SemiAutoregressiveFlow &model, const Matrix &y, SaefStats *stats = nullptr);

/// Per-row log density (m x 1); the Jacobian is block triangular.
Tensor saef_log_likelihood(const SemiAutoregressiveFlow &model, std::span<const Tensor> params,
                           const Matrix &y);
Vector saef_log_likelihood(const SemiAutoregressiveFlow &model, const Matrix &y);

}  // namespace eflow::flows
