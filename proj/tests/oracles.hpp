#pragma once

// Brute-force reference implementations used only by the tests. They follow
// the textbook definitions directly (double loops, explicit inverses,
// iterative matrix square roots) and share no code with the library.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline double ks(const std::vector<double> &a, const std::vector<double> &b) {
  double best = 0.0;
  std::vector<double> points = a;
  points.insert(points.end(), b.begin(), b.end());
  for (double t : points) {
    double fa = 0.0, fb = 0.0;
    for (double v : a) fa += v <= t ? 1.0 : 0.0;
    for (double v : b) fb += v <= t ? 1.0 : 0.0;
    best = std::max(best, std::abs(fa / a.size() - fb / b.size()));
  }
  return best;
}

inline Vec mean(const Mat &x) {
  Vec m = Vec::Zero(x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) m(j) += x(i, j);
  return m / static_cast<double>(x.rows());
}

inline Mat covariance(const Mat &x) {
  const Vec m = mean(x);
  Mat s = Mat::Zero(x.cols(), x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int p = 0; p < x.cols(); ++p)
      for (int q = 0; q < x.cols(); ++q) s(p, q) += (x(i, p) - m(p)) * (x(i, q) - m(q));
  return s / static_cast<double>(x.rows() - 1);
}

inline double hotelling(const Mat &a, const Mat &b) {
  const Vec delta = mean(a) - mean(b);
  const Mat pooled = 0.5 * (covariance(a) + covariance(b));
  return delta.dot(pooled.inverse() * delta);
}

// Denman-Beavers iteration for the principal square root of a matrix with
// positive real spectrum.
inline Mat sqrtm(const Mat &a) {
  Mat y = a;
  Mat z = Mat::Identity(a.rows(), a.cols());
  for (int it = 0; it < 100; ++it) {
    const Mat y_next = 0.5 * (y + z.inverse());
    const Mat z_next = 0.5 * (z + y.inverse());
    const double change = (y_next - y).norm();
    y = y_next;
    z = z_next;
    if (change < 1e-15 * std::max(1.0, y.norm())) break;
  }
  return y;
}

inline double frechet(const Mat &a, const Mat &b) {
  const Vec delta = mean(a) - mean(b);
  const Mat sa = covariance(a);
  const Mat sb = covariance(b);
  return delta.squaredNorm() + (sa + sb - 2.0 * sqrtm(sa * sb)).trace();
}

inline double crps_1d(const std::vector<double> &x, double y) {
  const double m = static_cast<double>(x.size());
  double fit = 0.0, spread = 0.0;
  for (double xi : x) fit += std::abs(xi - y);
  for (double xi : x)
    for (double xj : x) spread += std::abs(xi - xj);
  return fit / m - spread / (2.0 * m * m);
}

// l1 CRPS of a model sample set against each data row, averaged over data.
inline double crps_l1(const Mat &model, const Mat &data) {
  const double m = static_cast<double>(model.rows());
  double total = 0.0;
  for (int r = 0; r < data.rows(); ++r) {
    double fit = 0.0, spread = 0.0;
    for (int i = 0; i < model.rows(); ++i) fit += (model.row(i) - data.row(r)).lpNorm<1>();
    for (int i = 0; i < model.rows(); ++i)
      for (int j = 0; j < model.rows(); ++j) spread += (model.row(i) - model.row(j)).lpNorm<1>();
    total += fit / m - spread / (2.0 * m * m);
  }
  return total / static_cast<double>(data.rows());
}

inline double rbf(const Vec &x, const Vec &y, double gamma) {
  return std::exp(-gamma * (x - y).squaredNorm());
}

inline double mmd2(const Mat &a, const Mat &b, double gamma, bool unbiased) {
  const int m = static_cast<int>(a.rows()), n = static_cast<int>(b.rows());
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (!unbiased || i != j) aa += rbf(a.row(i), a.row(j), gamma);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!unbiased || i != j) bb += rbf(b.row(i), b.row(j), gamma);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) ab += rbf(a.row(i), b.row(j), gamma);
  aa /= unbiased ? m * (m - 1.0) : double(m) * m;
  bb /= unbiased ? n * (n - 1.0) : double(n) * n;
  return aa + bb - 2.0 * ab / (double(m) * n);
}

// Energy score of model samples against one datum, U-statistic intra term.
inline double energy_score(const Mat &model, const Vec &y, double beta) {
  const int m = static_cast<int>(model.rows());
  double intra = 0.0, fit = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) intra += std::pow((model.row(i) - model.row(j)).norm(), beta);
  for (int i = 0; i < m; ++i) fit += std::pow((model.row(i).transpose() - y).norm(), beta);
  return -0.5 * intra / (m * (m - 1.0)) + fit / m;
}

}  // namespace oracle
