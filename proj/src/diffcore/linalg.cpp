#include "eflow/diffcore/linalg.hpp"

#include <atomic>
#include <cmath>
#include <numeric>

#include "eflow/core/error.hpp"

namespace eflow::diffcore {

namespace {
std::atomic<std::uint64_t> g_lu_calls{0};
}

std::uint64_t lu_decompose_count() { return g_lu_calls.load(); }

LuFactorization lu_decompose(const Matrix &a) {
  g_lu_calls.fetch_add(1);
  require(a.rows() == a.cols(), ErrorKind::dimension, "LU needs a square matrix");
  const Index n = a.rows();
  LuFactorization f;
  f.lu = a;
  f.permutation.resize(static_cast<std::size_t>(n));
  std::iota(f.permutation.begin(), f.permutation.end(), Index{0});
  f.sign = 1;

  Matrix &m = f.lu;
  for (Index k = 0; k < n; ++k) {
    Index pivot = k;
    double best = std::abs(m(k, k));
    for (Index i = k + 1; i < n; ++i) {
      if (std::abs(m(i, k)) > best) {
        best = std::abs(m(i, k));
        pivot = i;
      }
    }
    if (!(best >= kEpsPivot)) {
      raise(ErrorKind::singular, "pivot magnitude below 1e-12 in column " + std::to_string(k));
    }
    if (pivot != k) {
      m.row(k).swap(m.row(pivot));
      std::swap(f.permutation[k], f.permutation[pivot]);
      f.sign = -f.sign;
    }
    const double diag = m(k, k);
    for (Index i = k + 1; i < n; ++i) {
      const double factor = m(i, k) / diag;
      m(i, k) = factor;
      if (factor != 0.0) {
        m.row(i).tail(n - k - 1) -= factor * m.row(k).tail(n - k - 1);
      }
    }
  }
  return f;
}

Matrix LuFactorization::lower() const {
  Matrix l = lu.triangularView<Eigen::StrictlyLower>();
  l.diagonal().setOnes();
  return l;
}

Matrix LuFactorization::upper() const { return lu.triangularView<Eigen::Upper>(); }

double LuFactorization::log_abs_det() const {
  double acc = 0.0;
  for (Index i = 0; i < dim(); ++i) {
    acc += std::log(std::abs(lu(i, i)));
  }
  return acc;
}

double LuFactorization::det() const {
  double acc = sign;
  for (Index i = 0; i < dim(); ++i) {
    acc *= lu(i, i);
  }
  return acc;
}

namespace {

void check_solvable(const LuFactorization &f, const Matrix &b) {
  require(b.rows() == f.dim(), ErrorKind::dimension, "right-hand side rows do not match");
  for (Index i = 0; i < f.dim(); ++i) {
    if (!(std::abs(f.lu(i, i)) >= kEpsPivot)) {
      raise(ErrorKind::singular, "factorization is singular");
    }
  }
}

}  // namespace

Matrix lu_solve(const LuFactorization &f, const Matrix &b) {
  check_solvable(f, b);
  const Index n = f.dim();
  Matrix x(n, b.cols());
  for (Index i = 0; i < n; ++i) {
    x.row(i) = b.row(f.permutation[i]);
  }
  // Forward substitution with unit L.
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < i; ++k) {
      x.row(i) -= f.lu(i, k) * x.row(k);
    }
  }
  // Back substitution with U.
  for (Index i = n - 1; i >= 0; --i) {
    for (Index k = i + 1; k < n; ++k) {
      x.row(i) -= f.lu(i, k) * x.row(k);
    }
    x.row(i) /= f.lu(i, i);
  }
  return x;
}

Matrix lu_solve_transposed(const LuFactorization &f, const Matrix &b) {
  check_solvable(f, b);
  // A^T = U^T L^T P, so solve U^T w = b, then L^T v = w, then x = P^T v.
  const Index n = f.dim();
  Matrix w = b;
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < i; ++k) {
      w.row(i) -= f.lu(k, i) * w.row(k);
    }
    w.row(i) /= f.lu(i, i);
  }
  for (Index i = n - 1; i >= 0; --i) {
    for (Index k = i + 1; k < n; ++k) {
      w.row(i) -= f.lu(k, i) * w.row(k);
    }
  }
  Matrix x(n, b.cols());
  for (Index i = 0; i < n; ++i) {
    x.row(f.permutation[i]) = w.row(i);
  }
  return x;
}

}  // namespace eflow::diffcore
