#include "eflow/losses/sliced.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "eflow/core/error.hpp"
#include "eflow/diffcore/ops.hpp"
#include "eflow/losses/statistics.hpp"

namespace eflow::losses {

using diffcore::Tape;

Matrix draw_projections(Index d, int n, Engine &engine) {
  require(n >= 1, ErrorKind::config, "n_projections must be >= 1");
  require(d >= 1, ErrorKind::dimension, "projection dimension must be >= 1");
  Matrix v = standard_normal(d, n, engine);
  for (Index c = 0; c < v.cols(); ++c) {
    const double norm = v.col(c).norm();
    if (norm > 0.0) {
      v.col(c) /= norm;
    } else {
      v.col(c).setZero();
      v(0, c) = 1.0;
    }
  }
  return v;
}

Matrix draw_projections(Index d, const SliceConfig &slice) {
  Engine engine(slice.seed);
  return draw_projections(d, slice.n_projections, engine);
}

namespace {

// One column of the batch energy: value and gradient w.r.t. the model values.
double energy_column_sorted(const std::vector<double> &y, std::vector<double> x_sorted,
                            std::vector<double> &grad) {
  const Index m = static_cast<Index>(y.size());
  const Index n = static_cast<Index>(x_sorted.size());
  std::sort(x_sorted.begin(), x_sorted.end());
  std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
  for (Index j = 0; j < n; ++j) prefix[j + 1] = prefix[j] + x_sorted[j];

  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return y[a] < y[b]; });

  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  const double w_intra = -0.5 * 2.0 / (dm * (dm - 1.0));
  const double w_fit = 1.0 / (dm * dn);

  double intra = 0.0;
  for (Index k = 0; k < m; ++k) {
    const double coef = 2.0 * static_cast<double>(k) - dm + 1.0;
    intra += coef * y[order[k]];
    grad[order[k]] += w_intra * coef;
  }
  double fit = 0.0;
  for (Index i = 0; i < m; ++i) {
    const auto split = std::lower_bound(x_sorted.begin(), x_sorted.end(), y[i]);
    const auto below = static_cast<Index>(split - x_sorted.begin());
    const double below_sum = prefix[below];
    const double above_sum = prefix[n] - below_sum;
    const double nb = static_cast<double>(below);
    const double na = dn - nb;
    fit += (nb * y[i] - below_sum) + (above_sum - na * y[i]);
    grad[i] += w_fit * (nb - na);
  }
  return w_intra * intra + w_fit * fit;
}

double energy_column_pairs(const std::vector<double> &y, const std::vector<double> &x, double beta,
                           std::vector<double> &grad) {
  const Index m = static_cast<Index>(y.size());
  const Index n = static_cast<Index>(x.size());
  const double dm = static_cast<double>(m);
  const double w_intra = -0.5 * 2.0 / (dm * (dm - 1.0));
  const double w_fit = 1.0 / (dm * static_cast<double>(n));
  const auto term = [beta](double delta, double &slope) {
    const double r = std::abs(delta);
    if (r == 0.0) {
      slope = 0.0;
      return 0.0;
    }
    slope = beta * std::pow(r, beta - 1.0) * (delta > 0.0 ? 1.0 : -1.0);
    return std::pow(r, beta);
  };
  double total = 0.0;
  double slope = 0.0;
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      total += w_intra * term(y[i] - y[j], slope);
      grad[i] += w_intra * slope;
      grad[j] -= w_intra * slope;
    }
    for (Index j = 0; j < n; ++j) {
      total += w_fit * term(y[i] - x[j], slope);
      grad[i] += w_fit * slope;
    }
  }
  return total;
}

}  // namespace

Tensor energy_1d_columns(const Tensor &model, const Matrix &data, double beta) {
  require(beta > 0.0 && beta < 2.0, ErrorKind::domain, "beta must lie in (0, 2)");
  if (model.cols() != data.cols()) raise(ErrorKind::dimension, "projected batches differ in width");
  if (model.rows() < 2) raise(ErrorKind::sample_size, "batch energy needs at least 2 model samples");
  if (data.rows() < 1) raise(ErrorKind::sample_size, "empty data batch");
  const Index m = model.rows();
  const Index cols = model.cols();
  Matrix grad = Matrix::Zero(m, cols);
  std::vector<double> y(static_cast<std::size_t>(m));
  std::vector<double> x(static_cast<std::size_t>(data.rows()));
  std::vector<double> g(static_cast<std::size_t>(m));
  double total = 0.0;
  for (Index c = 0; c < cols; ++c) {
    for (Index i = 0; i < m; ++i) y[i] = model.value()(i, c);
    for (Index j = 0; j < data.rows(); ++j) x[j] = data(j, c);
    std::fill(g.begin(), g.end(), 0.0);
    total += beta == 1.0 ? energy_column_sorted(y, x, g) : energy_column_pairs(y, x, beta, g);
    for (Index i = 0; i < m; ++i) grad(i, c) = g[i];
  }
  const double inv = 1.0 / static_cast<double>(cols);
  grad *= inv;
  Matrix v(1, 1);
  v(0, 0) = total * inv;
  const Tensor parents[] = {model};
  return Tape::record(std::move(v), parents,
                      [grad = std::move(grad)](const Matrix &gout, std::span<Matrix *const> pg) {
                        *pg[0] += gout(0, 0) * grad;
                      });
}

Tensor sliced_loss(SliceBase base, const Tensor &model, const Matrix &data,
                   const Matrix &projections, double beta) {
  if (model.cols() != data.cols() || projections.rows() != model.cols()) {
    raise(ErrorKind::dimension, "model, data and projections disagree on dimension");
  }
  const Tensor directions(projections);
  const Tensor projected_model = diffcore::matmul(model, directions);
  const Matrix projected_data = data * projections;
  switch (base) {
    case SliceBase::energy:
      return energy_1d_columns(projected_model, projected_data, beta);
    case SliceBase::ks:
      return ks_columns(projected_model, projected_data);
    case SliceBase::hotelling_1d:
      return hotelling_1d_columns(projected_model, projected_data);
    case SliceBase::frechet_1d:
      return frechet_1d_columns(projected_model, projected_data);
  }
  raise(ErrorKind::contract, "unknown slice base");
}

Tensor sliced_loss(SliceBase base, const Tensor &model, const Matrix &data,
                   const SliceConfig &slice, double beta) {
  if (model.cols() != data.cols()) raise(ErrorKind::dimension, "model and data dimensions differ");
  return sliced_loss(base, model, data, draw_projections(model.cols(), slice), beta);
}

SliceBase slice_base_for(Objective objective) {
  switch (objective) {
    case Objective::sliced_energy: return SliceBase::energy;
    case Objective::sliced_ks: return SliceBase::ks;
    case Objective::sliced_hotelling: return SliceBase::hotelling_1d;
    case Objective::sliced_frechet: return SliceBase::frechet_1d;
    default: break;
  }
  raise(ErrorKind::contract, "objective " + to_string(objective) + " is not sliced");
}

}  // namespace eflow::losses
