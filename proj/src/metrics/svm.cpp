#include "eflow/metrics/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eflow/core/error.hpp"
#include "eflow/core/rng.hpp"

namespace eflow::metrics {

namespace {

double rbf(const double *a, const double *b, Index d, double gamma) {
  double s = 0.0;
  for (Index k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::exp(-gamma * s);
}

}  // namespace

double SvmDiscriminator::decision_value(const RowVector &x) const {
  require(x.size() == support_points.cols(), ErrorKind::dimension, "svm input width mismatch");
  double f = bias;
  for (Index i = 0; i < support_points.rows(); ++i) {
    f += dual_coefficients[i] * rbf(support_points.row(i).data(), x.data(), x.size(), gamma);
  }
  return f;
}

int SvmDiscriminator::predict(const RowVector &x) const { return decision_value(x) > 0.0 ? 1 : 0; }

SvmDiscriminator fit_svm(const Matrix &x, const std::vector<int> &labels, double gamma,
                         const SvmConfig &cfg) {
  const Index n = x.rows();
  require(static_cast<Index>(labels.size()) == n, ErrorKind::dimension, "one label per row");
  require(gamma > 0.0 && cfg.c > 0.0, ErrorKind::config, "svm gamma and C must be > 0");
  for (int y : labels) require(y == 1 || y == -1, ErrorKind::contract, "svm labels are +1 / -1");

  // Q_ij = y_i y_j (K_ij + 1).
  Matrix q(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      const double v = labels[i] * labels[j] * (rbf(x.row(i).data(), x.row(j).data(), x.cols(), gamma) + 1.0);
      q(i, j) = v;
      q(j, i) = v;
    }
  }
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
  // Gradient of 1/2 a'Qa - sum a.
  Vector grad = Vector::Constant(n, -1.0);
  SvmDiscriminator svm;
  svm.gamma = gamma;
  for (svm.passes = 0; svm.passes < cfg.max_passes;) {
    ++svm.passes;
    double worst = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double g = grad(i);
      double pg = g;
      if (alpha[i] <= 0.0) pg = std::min(g, 0.0);
      if (alpha[i] >= cfg.c) pg = std::max(g, 0.0);
      worst = std::max(worst, std::abs(pg));
      if (pg == 0.0) continue;
      const double updated = std::clamp(alpha[i] - g / q(i, i), 0.0, cfg.c);
      const double delta = updated - alpha[i];
      if (delta == 0.0) continue;
      alpha[i] = updated;
      grad += delta * q.row(i).transpose();
    }
    if (worst < cfg.tolerance) break;
  }
  std::vector<Index> support;
  for (Index i = 0; i < n; ++i) {
    if (alpha[i] > 0.0) support.push_back(i);
  }
  svm.support_points.resize(static_cast<Index>(support.size()), x.cols());
  for (std::size_t s = 0; s < support.size(); ++s) {
    const Index i = support[s];
    svm.support_points.row(static_cast<Index>(s)) = x.row(i);
    svm.dual_coefficients.push_back(alpha[i] * labels[i]);
    svm.bias += alpha[i] * labels[i];
  }
  return svm;
}

std::vector<double> default_gamma_grid() {
  std::vector<double> grid;
  for (int e = -4; e <= 4; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

DLossResult d_loss(const Matrix &real, const Matrix &fake, std::uint64_t seed,
                   const std::vector<double> &gammas, const SvmConfig &cfg) {
  require(real.cols() == fake.cols(), ErrorKind::dimension, "real and fake widths differ");
  if (real.rows() < 5 || fake.rows() < 5) {
    raise(ErrorKind::sample_size, "d-loss needs at least 5 points per class");
  }
  require(!gammas.empty(), ErrorKind::config, "d-loss needs at least one gamma");
  Engine engine = SeedStream(seed).engine("dloss");
  Matrix train_x(0, real.cols()), val_x(0, real.cols());
  std::vector<int> train_y, val_y;
  for (const auto &[points, label] : {std::pair<const Matrix &, int>{real, 1}, {fake, -1}}) {
    std::vector<Index> order(static_cast<std::size_t>(points.rows()));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), engine);
    const auto n_train = static_cast<Index>(std::llround(0.8 * static_cast<double>(points.rows())));
    for (Index k = 0; k < points.rows(); ++k) {
      Matrix &dest = k < n_train ? train_x : val_x;
      dest.conservativeResize(dest.rows() + 1, Eigen::NoChange);
      dest.row(dest.rows() - 1) = points.row(order[k]);
      (k < n_train ? train_y : val_y).push_back(label);
    }
  }
  DLossResult result;
  for (double gamma : gammas) {
    const SvmDiscriminator svm = fit_svm(train_x, train_y, gamma, cfg);
    Index correct = 0;
    for (Index i = 0; i < val_x.rows(); ++i) {
      correct += svm.predict(val_x.row(i)) == (val_y[i] == 1 ? 1 : 0);
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(val_x.rows());
    result.accuracy_per_gamma.push_back(accuracy);
    result.d_loss = std::max(result.d_loss, accuracy);
  }
  return result;
}

}  // namespace eflow::metrics
