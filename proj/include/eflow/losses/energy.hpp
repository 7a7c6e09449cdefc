#pragma once

#include "eflow/core/matrix.hpp"
#include "eflow/diffcore/tensor.hpp"
#include "eflow/losses/kernel.hpp"
#include "eflow/losses/loss_spec.hpp"

namespace eflow::losses {

using diffcore::Tensor;

/// How a pair difference is turned into a distance.
/// per_coordinate averages the 1-D term over columns; it is what a batch of
/// projected (sliced) samples needs.
enum class Distance { euclidean, per_coordinate };

/// Energy score of a model sample set against one datum, in minimization form
///   -1/2 E||Y - Y'||^beta + E||Y - y||^beta.
/// Differentiable with respect to the model samples.
Tensor energy_score(const Tensor &model, const RowVector &datum, double beta,
                    Pairing pairing = Pairing::u_statistic);

/// Kernelized energy loss for a similarity kernel,
///   +1/2 E K(Y, Y') - E K(Y, y),
/// whose expectation over the data equals 1/2 MMD^2(model, data) up to a
/// constant, so minimizing it minimizes MMD^2.
Tensor kernelized_energy_loss(const Tensor &model, const RowVector &datum, const KernelSpec &kernel,
                              Pairing pairing = Pairing::u_statistic);

/// Per-datum scores averaged over a data batch. Rows [i*k, i*k + k) of
/// `samples` are the model samples generated for data row i. The kernel
/// chooses the energy form (euclidean_beta) or the kernelized form.
Tensor grouped_energy_score(const Tensor &samples, const Matrix &data, Index k,
                            const KernelSpec &kernel, Pairing pairing = Pairing::u_statistic,
                            Distance distance = Distance::euclidean);

}  // namespace eflow::losses
