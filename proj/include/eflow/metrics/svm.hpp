#pragma once

#include <cstdint>
#include <vector>

#include "eflow/core/matrix.hpp"

namespace eflow::metrics {

struct SvmConfig {
  double c = 1.0;
  /// Largest projected gradient accepted at convergence.
  double tolerance = 1e-4;
  int max_passes = 10000;
};

/// Soft-margin RBF SVM. The bias is folded into the kernel (K + 1), which
/// removes the equality constraint from the dual and lets plain coordinate
/// ascent solve it.
struct SvmDiscriminator {
  double gamma = 1.0;
  /// alpha_i * y_i for the support points.
  std::vector<double> dual_coefficients;
  double bias = 0.0;
  Matrix support_points;
  int passes = 0;

  double decision_value(const RowVector &x) const;
  /// 1 for the positive class, 0 otherwise.
  int predict(const RowVector &x) const;
};

/// Labels are +1 / -1.
SvmDiscriminator fit_svm(const Matrix &x, const std::vector<int> &labels, double gamma,
                         const SvmConfig &cfg = {});

/// {1e-4, 1e-3, ..., 1e4}.
std::vector<double> default_gamma_grid();

struct DLossResult {
  double d_loss = 0.0;
  std::vector<double> accuracy_per_gamma;
};

/// Best validation accuracy over the gamma grid of SVMs separating real
/// (label 1) from fake samples. Both classes are split 80:20 with a seeded
/// shuffle; every gamma uses the same split.
DLossResult d_loss(const Matrix &real, const Matrix &fake, std::uint64_t seed,
                   const std::vector<double> &gammas = default_gamma_grid(),
                   const SvmConfig &cfg = {});

}  // namespace eflow::metrics
