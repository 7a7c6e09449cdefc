#include "eflow/metrics/crps.hpp"

#include <algorithm>
#include <vector>

#include "eflow/core/error.hpp"

namespace eflow::metrics {

RowVector crps_per_dimension(const Matrix &model, const Matrix &data) {
  if (model.cols() != data.cols()) {
    raise(ErrorKind::dimension, "model samples have " + std::to_string(model.cols()) +
                                    " columns, data has " + std::to_string(data.cols()));
  }
  require(model.rows() >= 1, ErrorKind::sample_size, "crps needs at least one model sample");
  require(data.rows() >= 1, ErrorKind::sample_size, "crps needs at least one data row");
  const Index m = model.rows();
  const auto md = static_cast<double>(m);
  RowVector out(model.cols());
  std::vector<double> sorted(static_cast<std::size_t>(m));
  std::vector<double> prefix(static_cast<std::size_t>(m) + 1);
  for (Index c = 0; c < model.cols(); ++c) {
    for (Index i = 0; i < m; ++i) sorted[i] = model(i, c);
    std::sort(sorted.begin(), sorted.end());
    prefix[0] = 0.0;
    for (Index i = 0; i < m; ++i) prefix[i + 1] = prefix[i] + sorted[i];
    // sum_ij |x_i - x_j| = 2 sum_i (2i - m + 1) x_(i) over the sorted order.
    double spread = 0.0;
    for (Index i = 0; i < m; ++i) spread += (2.0 * i - md + 1.0) * sorted[i];
    spread *= 2.0;
    double fit = 0.0;
    for (Index r = 0; r < data.rows(); ++r) {
      const double y = data(r, c);
      const auto below = std::lower_bound(sorted.begin(), sorted.end(), y) - sorted.begin();
      const double lo = prefix[below];
      const double hi = prefix[m] - lo;
      fit += static_cast<double>(below) * y - lo + hi - static_cast<double>(m - below) * y;
    }
    out(c) = fit / (md * static_cast<double>(data.rows())) - spread / (2.0 * md * md);
  }
  return out;
}

double crps_metric(const Matrix &model, const Matrix &data) {
  return crps_per_dimension(model, data).sum();
}

double u_crps_metric(const Matrix &model, const Matrix &data) {
  return crps_per_dimension(model, data).mean();
}

}  // namespace eflow::metrics
