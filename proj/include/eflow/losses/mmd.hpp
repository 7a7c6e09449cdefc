#pragma once

#include "eflow/core/matrix.hpp"
#include "eflow/losses/kernel.hpp"

namespace eflow::losses {

enum class MmdEstimator { unbiased, biased };

/// Squared maximum mean discrepancy between two samples. The unbiased
/// estimator drops the diagonal of both self-similarity sums and may be
/// negative. A euclidean_beta kernel is used through its distance-induced
/// form k(x, y) = -||x - y||^beta, which gives the energy distance.
double mmd_squared(const Matrix &a, const Matrix &b, const KernelSpec &kernel,
                   MmdEstimator estimator = MmdEstimator::unbiased);

/// k(x, y) for any kernel, using the distance-induced form for euclidean_beta.
double kernel_value(const KernelSpec &kernel, const double *x, const double *y, Index d);

}  // namespace eflow::losses
