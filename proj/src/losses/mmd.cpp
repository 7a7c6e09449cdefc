#include "eflow/losses/mmd.hpp"

#include <cmath>

#include "eflow/core/error.hpp"

namespace eflow::losses {

double kernel_value(const KernelSpec &kernel, const double *x, const double *y, Index d) {
  double sq = 0.0;
  for (Index p = 0; p < d; ++p) {
    const double diff = x[p] - y[p];
    sq += diff * diff;
  }
  if (kernel.is_similarity()) {
    return kernel.similarity(sq);
  }
  return -std::pow(std::sqrt(sq), kernel.beta);
}

namespace {

double self_sum(const Matrix &x, const KernelSpec &kernel, bool include_diagonal) {
  const Index n = x.rows();
  const Index d = x.cols();
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      acc += kernel_value(kernel, x.row(i).data(), x.row(j).data(), d);
    }
  }
  acc *= 2.0;
  if (include_diagonal) {
    for (Index i = 0; i < n; ++i) {
      acc += kernel_value(kernel, x.row(i).data(), x.row(i).data(), d);
    }
  }
  return acc;
}

}  // namespace

double mmd_squared(const Matrix &a, const Matrix &b, const KernelSpec &kernel,
                   MmdEstimator estimator) {
  kernel.validate();
  if (a.cols() != b.cols()) raise(ErrorKind::dimension, "mmd: samples differ in dimension");
  const Index m = a.rows();
  const Index n = b.rows();
  const bool unbiased = estimator == MmdEstimator::unbiased;
  if (unbiased && (m < 2 || n < 2)) {
    raise(ErrorKind::sample_size, "unbiased MMD needs at least 2 points per sample");
  }
  if (m < 1 || n < 1) raise(ErrorKind::sample_size, "mmd of an empty sample");

  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  const double aa = self_sum(a, kernel, !unbiased) / (unbiased ? dm * (dm - 1.0) : dm * dm);
  const double bb = self_sum(b, kernel, !unbiased) / (unbiased ? dn * (dn - 1.0) : dn * dn);
  double ab = 0.0;
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      ab += kernel_value(kernel, a.row(i).data(), b.row(j).data(), a.cols());
    }
  }
  ab /= dm * dn;
  return aa + bb - 2.0 * ab;
}

}  // namespace eflow::losses
