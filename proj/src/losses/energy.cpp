#include "eflow/losses/energy.hpp"

#include <cmath>
#include <string>

#include "eflow/core/error.hpp"
#include "eflow/diffcore/ops.hpp"

namespace eflow::losses {

namespace {

using diffcore::kEpsNorm;
using diffcore::Tape;

// Pair term f(delta) for delta = a - b. Writes df/d(delta) into grad when
// grad is non-null and returns f.
struct PairTerm {
  const KernelSpec &kernel;
  Distance distance;

  double operator()(const double *delta, Index d, double *grad) const {
    const bool similarity = kernel.is_similarity();
    if (distance == Distance::per_coordinate) {
      const double inv = 1.0 / static_cast<double>(d);
      double acc = 0.0;
      for (Index p = 0; p < d; ++p) {
        const double x = delta[p];
        if (similarity) {
          acc += kernel.similarity(x * x);
          if (grad) grad[p] = inv * 2.0 * kernel.similarity_slope(x * x) * x;
        } else {
          const double r = std::abs(x);
          acc += kernel.beta == 1.0 ? r : std::pow(r, kernel.beta);
          if (grad) {
            grad[p] = r > 0.0 ? inv * kernel.beta * std::pow(r, kernel.beta - 1.0) *
                                    (x > 0.0 ? 1.0 : -1.0)
                              : 0.0;
          }
        }
      }
      return acc * inv;
    }

    double sq = 0.0;
    for (Index p = 0; p < d; ++p) sq += delta[p] * delta[p];
    if (similarity) {
      if (grad) {
        const double slope = 2.0 * kernel.similarity_slope(sq);
        for (Index p = 0; p < d; ++p) grad[p] = slope * delta[p];
      }
      return kernel.similarity(sq);
    }
    const double r = std::sqrt(sq);
    if (grad) {
      const double coef =
          r > 0.0 ? kernel.beta * std::pow(r, kernel.beta - 1.0) / std::max(r, kEpsNorm) : 0.0;
      for (Index p = 0; p < d; ++p) grad[p] = coef * delta[p];
    }
    return kernel.beta == 1.0 ? r : std::pow(r, kernel.beta);
  }
};

void check_group_size(Index k, Pairing pairing) {
  if (pairing == Pairing::u_statistic) {
    if (k < 2) {
      raise(ErrorKind::sample_size, "U-statistic pairing needs at least 2 model samples");
    }
  } else if (k < 2 || k % 2 != 0) {
    raise(ErrorKind::sample_size, "paired estimation needs an even number (>= 2) of samples");
  }
}

}  // namespace

Tensor grouped_energy_score(const Tensor &samples, const Matrix &data, Index k,
                            const KernelSpec &kernel, Pairing pairing, Distance distance) {
  kernel.validate();
  check_group_size(k, pairing);
  const Index n = data.rows();
  const Index d = data.cols();
  if (n < 1) raise(ErrorKind::sample_size, "empty data batch");
  if (samples.cols() != d || samples.rows() != n * k) {
    raise(ErrorKind::dimension, "model samples must be (n*k) x d = " + std::to_string(n * k) +
                                    "x" + std::to_string(d));
  }

  // Energy form: -1/2 intra + fit. Kernelized form: +1/2 intra - fit.
  const double intra_coef = kernel.is_similarity() ? 0.5 : -0.5;
  const double fit_coef = kernel.is_similarity() ? -1.0 : 1.0;
  const bool want_grad = samples.on_tape();
  const Matrix &y = samples.value();
  const double inv_n = 1.0 / static_cast<double>(n);

  Matrix grad = want_grad ? Matrix::Zero(y.rows(), d) : Matrix();
  std::vector<double> delta(static_cast<std::size_t>(d));
  std::vector<double> g(static_cast<std::size_t>(d));
  double *gp = want_grad ? g.data() : nullptr;
  const PairTerm term{kernel, distance};

  const auto accumulate = [&](Index a, const double *other, Index b, double weight) {
    for (Index p = 0; p < d; ++p) delta[p] = y(a, p) - other[p];
    const double v = term(delta.data(), d, gp);
    if (want_grad) {
      for (Index p = 0; p < d; ++p) {
        grad(a, p) += weight * g[p];
        if (b >= 0) grad(b, p) -= weight * g[p];
      }
    }
    return weight * v;
  };

  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Index base = i * k;
    if (pairing == Pairing::u_statistic) {
      const double w = intra_coef * inv_n * 2.0 / static_cast<double>(k * (k - 1));
      for (Index a = 0; a < k; ++a) {
        for (Index b = a + 1; b < k; ++b) {
          total += accumulate(base + a, y.row(base + b).data(), base + b, w);
        }
      }
    } else {
      const Index half = k / 2;
      const double w = intra_coef * inv_n / static_cast<double>(half);
      for (Index a = 0; a < half; ++a) {
        total += accumulate(base + a, y.row(base + a + half).data(), base + a + half, w);
      }
    }
    const double w_fit = fit_coef * inv_n / static_cast<double>(k);
    const RowVector x = data.row(i);
    for (Index a = 0; a < k; ++a) {
      total += accumulate(base + a, x.data(), -1, w_fit);
    }
  }

  Matrix value(1, 1);
  value(0, 0) = total;
  const Tensor parents[] = {samples};
  return Tape::record(std::move(value), parents,
                      [grad = std::move(grad)](const Matrix &g_out,
                                               std::span<Matrix *const> pg) {
                        *pg[0] += g_out(0, 0) * grad;
                      });
}

Tensor energy_score(const Tensor &model, const RowVector &datum, double beta, Pairing pairing) {
  const KernelSpec kernel = KernelSpec::euclidean(beta);
  kernel.validate();
  return grouped_energy_score(model, Matrix(datum), model.rows(), kernel, pairing);
}

Tensor kernelized_energy_loss(const Tensor &model, const RowVector &datum, const KernelSpec &kernel,
                              Pairing pairing) {
  if (!kernel.is_similarity()) {
    raise(ErrorKind::contract, "kernelized_energy_loss needs a similarity kernel; use energy_score");
  }
  return grouped_energy_score(model, Matrix(datum), model.rows(), kernel, pairing);
}

}  // namespace eflow::losses
