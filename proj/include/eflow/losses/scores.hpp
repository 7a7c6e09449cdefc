#pragma once

#include <span>

#include "eflow/core/matrix.hpp"
#include "eflow/diffcore/tensor.hpp"

namespace eflow::losses {

/// Sample CRPS of a 1-D forecast ensemble against one outcome, in the biased
/// (V-statistic) form
///   (1/m) sum |x_i - y| - 1/(2 m^2) sum_ij |x_i - x_j|.
double crps_1d(std::span<const double> samples, double y);

/// Check (quantile) score at level tau in [0, 1]:
///   tau (y - q) if y >= q, else (1 - tau) (q - y).
double check_score(double predicted_quantile, double tau, double y);

/// Mean check score over rows; differentiable in the predicted quantiles.
/// quantiles and targets are m x 1, taus has m entries.
diffcore::Tensor check_score_loss(const diffcore::Tensor &quantiles, std::span<const double> taus,
                                  const Matrix &targets);

}  // namespace eflow::losses
