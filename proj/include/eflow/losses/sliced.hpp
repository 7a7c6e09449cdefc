#pragma once

#include "eflow/core/matrix.hpp"
#include "eflow/core/rng.hpp"
#include "eflow/diffcore/tensor.hpp"
#include "eflow/losses/loss_spec.hpp"

namespace eflow::losses {

using diffcore::Tensor;

/// 1-D objective evaluated on each projection.
enum class SliceBase { energy, ks, hotelling_1d, frechet_1d };

/// d x n matrix of directions drawn from N(0, I_d), each normalized to unit
/// length.
Matrix draw_projections(Index d, int n, Engine &engine);
Matrix draw_projections(Index d, const SliceConfig &slice);

/// Mean over projection columns of the 1-D objective between the projected
/// model and data batches.
Tensor sliced_loss(SliceBase base, const Tensor &model, const Matrix &data,
                   const Matrix &projections, double beta = 1.0);
Tensor sliced_loss(SliceBase base, const Tensor &model, const Matrix &data,
                   const SliceConfig &slice, double beta = 1.0);

/// Column-wise batch energy score, averaged over data rows and columns:
///   -1/2 U-stat |y - y'|^beta + mean |y - x|^beta.
/// Uses an O(m log m) sorted sweep when beta == 1.
Tensor energy_1d_columns(const Tensor &model, const Matrix &data, double beta = 1.0);

SliceBase slice_base_for(Objective objective);

}  // namespace eflow::losses
