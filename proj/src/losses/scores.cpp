#include "eflow/losses/scores.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "eflow/core/error.hpp"

namespace eflow::losses {

double crps_1d(std::span<const double> samples, double y) {
  require(!samples.empty(), ErrorKind::sample_size, "crps_1d needs at least one sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  double fit = 0.0;
  double spread = 0.0;
  // sum_{i<j} (x_(j) - x_(i)) = sum_k (2k - m + 1) x_(k) over the sorted order.
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    fit += std::abs(sorted[k] - y);
    spread += (2.0 * static_cast<double>(k) - m + 1.0) * sorted[k];
  }
  // The double sum over all (i, j) counts each unordered pair twice.
  return fit / m - (2.0 * spread) / (2.0 * m * m);
}

double check_score(double predicted_quantile, double tau, double y) {
  require(tau >= 0.0 && tau <= 1.0, ErrorKind::domain, "tau must lie in [0, 1]");
  return y >= predicted_quantile ? tau * (y - predicted_quantile)
                                 : (1.0 - tau) * (predicted_quantile - y);
}

diffcore::Tensor check_score_loss(const diffcore::Tensor &quantiles, std::span<const double> taus,
                                  const Matrix &targets) {
  const Index m = quantiles.rows();
  require(quantiles.cols() == 1 && targets.cols() == 1 && targets.rows() == m &&
              static_cast<Index>(taus.size()) == m,
          ErrorKind::dimension, "check_score_loss expects matching m x 1 inputs");
  require(m >= 1, ErrorKind::sample_size, "check_score_loss of an empty batch");
  Matrix grad(m, 1);
  double total = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double q = quantiles.value()(i, 0);
    const double tau = taus[static_cast<std::size_t>(i)];
    total += check_score(q, tau, targets(i, 0));
    grad(i, 0) = (targets(i, 0) >= q ? -tau : 1.0 - tau) / static_cast<double>(m);
  }
  Matrix value(1, 1);
  value(0, 0) = total / static_cast<double>(m);
  const diffcore::Tensor parents[] = {quantiles};
  return diffcore::Tape::record(std::move(value), parents,
                                [grad](const Matrix &g, std::span<Matrix *const> pg) {
                                  *pg[0] += g(0, 0) * grad;
                                });
}

}  // namespace eflow::losses
