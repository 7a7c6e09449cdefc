#pragma once

#include "eflow/core/matrix.hpp"

namespace eflow::metrics {

/// Multivariate sample CRPS with the l1 norm, averaged over data rows:
///   (1/m) sum_i ||x_i - y||_1 - 1/(2 m^2) sum_ij ||x_i - x_j||_1.
/// The l1 norm splits over coordinates, so this is the sum of the
/// coordinatewise 1-D CRPS values.
double crps_metric(const Matrix &model, const Matrix &data);

/// Coordinatewise 1-D CRPS averaged over data rows and over coordinates.
double u_crps_metric(const Matrix &model, const Matrix &data);

/// Coordinatewise 1-D CRPS averaged over data rows, one entry per column.
RowVector crps_per_dimension(const Matrix &model, const Matrix &data);

}  // namespace eflow::metrics
