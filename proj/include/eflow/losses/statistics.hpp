#pragma once

#include <span>

#include "eflow/core/matrix.hpp"
#include "eflow/diffcore/tensor.hpp"

namespace eflow::losses {

using diffcore::Tensor;

/// Smallest pooled variance accepted by the 1-D Hotelling statistic.
inline constexpr double kEpsVariance = 1e-12;
/// Eigenvalues of a covariance product below this are treated as a failure
/// rather than clamped to zero.
inline constexpr double kEpsEigen = 1e-8;

/// sup_y |F_a(y) - F_b(y)| over the two empirical CDFs.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// (mean_a - mean_b)^2 / s^2 with s^2 the average of the two (n-1) variances.
double hotelling_1d(std::span<const double> a, std::span<const double> b);

/// (mean_a - mean_b)^2 + (var_a - var_b)^2.
double frechet_1d(std::span<const double> a, std::span<const double> b);

/// Hotelling two-sample statistic (m_a - m_b)^T S^-1 (m_a - m_b) with
/// S = (S_a + S_b) / 2. Differentiable in both batches; S is never inverted
/// explicitly.
Tensor hotelling_statistic(const Tensor &a, const Tensor &b);

/// Frechet distance between the Gaussians fitted to both batches,
///   ||m_a - m_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2}).
Tensor frechet_statistic(const Tensor &a, const Tensor &b);

// Column-wise 1-D statistics averaged over columns. Used by the sliced
// objectives, where each column holds one projection of the model and data
// batches. Differentiable in `model`; the KS statistic is piecewise constant,
// so its gradient is zero.
Tensor ks_columns(const Tensor &model, const Matrix &data);
Tensor hotelling_1d_columns(const Tensor &model, const Matrix &data);
Tensor frechet_1d_columns(const Tensor &model, const Matrix &data);

/// Column means and (n-1)-normalized sample covariance.
RowVector column_mean(const Matrix &x);
Matrix sample_covariance(const Matrix &x);

/// Square root of a symmetric positive semi-definite matrix.
Matrix psd_sqrt(const Matrix &s);

}  // namespace eflow::losses
