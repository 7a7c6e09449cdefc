#include "eflow/losses/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "eflow/core/error.hpp"
#include "eflow/diffcore/linalg.hpp"

namespace eflow::losses {

using diffcore::Tape;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <typename Get>
Moments moments(Index n, Get get) {
  Moments out;
  for (Index i = 0; i < n; ++i) out.mean += get(i);
  out.mean /= static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    const double c = get(i) - out.mean;
    out.var += c * c;
  }
  out.var /= static_cast<double>(n - 1);
  return out;
}

Moments moments(std::span<const double> x) {
  return moments(static_cast<Index>(x.size()), [&](Index i) { return x[i]; });
}

void need_two(std::size_t n, const char *what) {
  if (n < 2) raise(ErrorKind::sample_size, std::string(what) + " needs at least 2 samples");
}

double ks_sorted(std::vector<double> &a, std::vector<double> &b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  while (i < a.size() || j < b.size()) {
    double v;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
      v = a[i];
    } else {
      v = b[j];
    }
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

Tensor record_scalar(double value, const Tensor &a, const Tensor &b, Matrix grad_a, Matrix grad_b) {
  Matrix v(1, 1);
  v(0, 0) = value;
  const Tensor parents[] = {a, b};
  return Tape::record(std::move(v), parents,
                      [ga = std::move(grad_a), gb = std::move(grad_b)](
                          const Matrix &g, std::span<Matrix *const> pg) {
                        if (pg[0]) *pg[0] += g(0, 0) * ga;
                        if (pg[1]) *pg[1] += g(0, 0) * gb;
                      });
}

void check_pair(const Tensor &a, const Tensor &b) {
  if (a.cols() != b.cols()) raise(ErrorKind::dimension, "batches have different dimensions");
  need_two(static_cast<std::size_t>(a.rows()), "two-sample statistic");
  need_two(static_cast<std::size_t>(b.rows()), "two-sample statistic");
}

// Symmetric eigendecomposition with small negative eigenvalues clamped to 0.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> psd_eigen(const Matrix &s) {
  const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    raise(ErrorKind::numeric, "eigen-solver failed to converge");
  }
  if (solver.eigenvalues().size() > 0 && solver.eigenvalues().minCoeff() < -kEpsEigen) {
    raise(ErrorKind::numeric, "covariance product has a negative eigenvalue");
  }
  return solver;
}

Matrix spectral(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> &solver,
                double (*f)(double)) {
  const Eigen::VectorXd lambda = solver.eigenvalues().unaryExpr(f);
  return solver.eigenvectors() * lambda.asDiagonal() * solver.eigenvectors().transpose();
}

double clamped_sqrt(double x) { return std::sqrt(std::max(x, 0.0)); }
double clamped_inv_sqrt(double x) { return 1.0 / std::sqrt(std::max(x, 1e-12)); }

}  // namespace

RowVector column_mean(const Matrix &x) { return x.colwise().mean(); }

Matrix sample_covariance(const Matrix &x) {
  const Matrix centered = x.rowwise() - column_mean(x);
  return centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

Matrix psd_sqrt(const Matrix &s) { return spectral(psd_eigen(s), clamped_sqrt); }

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), ErrorKind::sample_size, "ks_statistic of an empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  return ks_sorted(sa, sb);
}

double hotelling_1d(std::span<const double> a, std::span<const double> b) {
  need_two(a.size(), "hotelling_1d");
  need_two(b.size(), "hotelling_1d");
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double s2 = 0.5 * (ma.var + mb.var);
  if (s2 <= kEpsVariance) raise(ErrorKind::singular, "degenerate combined variance");
  const double diff = ma.mean - mb.mean;
  return diff * diff / s2;
}

double frechet_1d(std::span<const double> a, std::span<const double> b) {
  need_two(a.size(), "frechet_1d");
  need_two(b.size(), "frechet_1d");
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double dm = ma.mean - mb.mean;
  const double dv = ma.var - mb.var;
  return dm * dm + dv * dv;
}

Tensor hotelling_statistic(const Tensor &a, const Tensor &b) {
  check_pair(a, b);
  const Matrix &xa = a.value();
  const Matrix &xb = b.value();
  const RowVector ma = column_mean(xa);
  const RowVector mb = column_mean(xb);
  const Matrix pooled = 0.5 * (sample_covariance(xa) + sample_covariance(xb));
  const Matrix delta = (ma - mb).transpose();
  diffcore::LuFactorization lu;
  try {
    lu = diffcore::lu_decompose(pooled);
  } catch (const Error &e) {
    if (e.kind() == ErrorKind::singular) raise(ErrorKind::singular, "singular pooled covariance");
    throw;
  }
  const Matrix u = diffcore::lu_solve(lu, delta);
  const double value = (delta.transpose() * u)(0, 0);

  const auto side_grad = [&](const Tensor &t, const RowVector &mean, double sign) {
    if (!t.on_tape()) return Matrix();
    const Matrix &x = t.value();
    const double n = static_cast<double>(x.rows());
    const Matrix centered = x.rowwise() - mean;
    const Matrix proj = centered * u;  // n x 1
    Matrix g = (sign * 2.0 / n) * u.transpose().replicate(x.rows(), 1);
    g -= (1.0 / (n - 1.0)) * proj * u.transpose();
    return g;
  };
  return record_scalar(value, a, b, side_grad(a, ma, 1.0), side_grad(b, mb, -1.0));
}

Tensor frechet_statistic(const Tensor &a, const Tensor &b) {
  check_pair(a, b);
  const Matrix &xa = a.value();
  const Matrix &xb = b.value();
  const RowVector ma = column_mean(xa);
  const RowVector mb = column_mean(xb);
  const Matrix sa = sample_covariance(xa);
  const Matrix sb = sample_covariance(xb);
  const Index d = sa.rows();

  // tr((S_a S_b)^{1/2}) = tr((A S_a A)^{1/2}) with A = S_b^{1/2}.
  const Matrix root_b = psd_sqrt(sb);
  const auto inner = psd_eigen(root_b * sa * root_b);
  const double cross = inner.eigenvalues().unaryExpr(&clamped_sqrt).sum();
  const RowVector delta = ma - mb;
  const double value = delta.squaredNorm() + sa.trace() + sb.trace() - 2.0 * cross;

  // dR/dS_a = I - A C^{-1/2} A, and symmetrically for S_b.
  const auto side_grad = [&](const Tensor &t, const RowVector &mean, const Matrix &gcov,
                             double sign) {
    if (!t.on_tape()) return Matrix();
    const Matrix &x = t.value();
    const double n = static_cast<double>(x.rows());
    const Matrix centered = x.rowwise() - mean;
    Matrix g = (sign * 2.0 / n) * delta.replicate(x.rows(), 1);
    g += (2.0 / (n - 1.0)) * centered * gcov;
    return g;
  };
  Matrix grad_a, grad_b;
  if (a.on_tape()) {
    const Matrix gcov = Matrix::Identity(d, d) - root_b * spectral(inner, clamped_inv_sqrt) * root_b;
    grad_a = side_grad(a, ma, gcov, 1.0);
  }
  if (b.on_tape()) {
    const Matrix root_a = psd_sqrt(sa);
    const auto other = psd_eigen(root_a * sb * root_a);
    const Matrix gcov = Matrix::Identity(d, d) - root_a * spectral(other, clamped_inv_sqrt) * root_a;
    grad_b = side_grad(b, mb, gcov, -1.0);
  }
  return record_scalar(value, a, b, std::move(grad_a), std::move(grad_b));
}

namespace {

template <typename PerColumn>
Tensor column_statistic(const Tensor &model, const Matrix &data, PerColumn per_column) {
  if (model.cols() != data.cols()) raise(ErrorKind::dimension, "projected batches differ in width");
  const Index cols = model.cols();
  require(cols >= 1, ErrorKind::dimension, "no projection columns");
  const Matrix &y = model.value();
  Matrix grad = Matrix::Zero(y.rows(), cols);
  double total = 0.0;
  for (Index c = 0; c < cols; ++c) {
    total += per_column(c, grad);
  }
  const double inv = 1.0 / static_cast<double>(cols);
  Matrix v(1, 1);
  v(0, 0) = total * inv;
  grad *= inv;
  const Tensor parents[] = {model};
  return Tape::record(std::move(v), parents,
                      [grad = std::move(grad)](const Matrix &g, std::span<Matrix *const> pg) {
                        *pg[0] += g(0, 0) * grad;
                      });
}

}  // namespace

Tensor ks_columns(const Tensor &model, const Matrix &data) {
  return column_statistic(model, data, [&](Index c, Matrix &) {
    std::vector<double> a(static_cast<std::size_t>(model.rows()));
    std::vector<double> b(static_cast<std::size_t>(data.rows()));
    for (Index i = 0; i < model.rows(); ++i) a[i] = model.value()(i, c);
    for (Index j = 0; j < data.rows(); ++j) b[j] = data(j, c);
    require(!a.empty() && !b.empty(), ErrorKind::sample_size, "ks of an empty sample");
    return ks_sorted(a, b);
  });
}

Tensor hotelling_1d_columns(const Tensor &model, const Matrix &data) {
  need_two(static_cast<std::size_t>(model.rows()), "hotelling_1d");
  need_two(static_cast<std::size_t>(data.rows()), "hotelling_1d");
  return column_statistic(model, data, [&](Index c, Matrix &grad) {
    const Matrix &y = model.value();
    const Index m = y.rows();
    const Moments ma = moments(m, [&](Index i) { return y(i, c); });
    const Moments mb = moments(data.rows(), [&](Index j) { return data(j, c); });
    const double s2 = 0.5 * (ma.var + mb.var);
    if (s2 <= kEpsVariance) raise(ErrorKind::singular, "degenerate combined variance");
    const double diff = ma.mean - mb.mean;
    const double dm = static_cast<double>(m);
    for (Index i = 0; i < m; ++i) {
      grad(i, c) += 2.0 * diff / (s2 * dm) -
                    diff * diff / (s2 * s2) * (y(i, c) - ma.mean) / (dm - 1.0);
    }
    return diff * diff / s2;
  });
}

Tensor frechet_1d_columns(const Tensor &model, const Matrix &data) {
  need_two(static_cast<std::size_t>(model.rows()), "frechet_1d");
  need_two(static_cast<std::size_t>(data.rows()), "frechet_1d");
  return column_statistic(model, data, [&](Index c, Matrix &grad) {
    const Matrix &y = model.value();
    const Index m = y.rows();
    const Moments ma = moments(m, [&](Index i) { return y(i, c); });
    const Moments mb = moments(data.rows(), [&](Index j) { return data(j, c); });
    const double dm = ma.mean - mb.mean;
    const double dv = ma.var - mb.var;
    const double n = static_cast<double>(m);
    for (Index i = 0; i < m; ++i) {
      grad(i, c) += 2.0 * dm / n + 4.0 * dv * (y(i, c) - ma.mean) / (n - 1.0);
    }
    return dm * dm + dv * dv;
  });
}

}  // namespace eflow::losses
