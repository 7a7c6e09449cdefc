#include "eflow/diffcore/ops.hpp"

#include <cmath>
#include <initializer_list>
#include <string>

#include "eflow/core/error.hpp"
#include "eflow/diffcore/linalg.hpp"

namespace eflow::diffcore {

namespace {

Tensor rec(Matrix value, std::initializer_list<Tensor> parents, BackwardFn fn) {
  return Tape::record(std::move(value), std::span<const Tensor>(parents.begin(), parents.size()),
                      std::move(fn));
}

void same_shape(const Tensor &a, const Tensor &b, const char *op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    raise(ErrorKind::dimension,
          std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" +
              std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
              std::to_string(b.cols()));
  }
}

void nonempty(const Tensor &a, const char *op) {
  if (a.size() == 0) {
    raise(ErrorKind::domain, std::string(op) + " of an empty tensor");
  }
}

// Elementwise unary op: forward f(x), backward g * df(x, y).
template <typename F, typename DF>
Tensor unary(const Tensor &a, F f, DF df) {
  Matrix y = a.value().unaryExpr(f);
  Tensor out_a = a;
  return rec(y, {a}, [out_a, df](const Matrix &g, std::span<Matrix *const> pg) {
    const Matrix &x = out_a.value();
    Matrix &ga = *pg[0];
    for (Index i = 0; i < x.size(); ++i) {
      ga.data()[i] += g.data()[i] * df(x.data()[i]);
    }
  });
}

}  // namespace

Tensor matmul(const Tensor &a, const Tensor &b) {
  if (a.cols() != b.rows()) {
    raise(ErrorKind::dimension, "matmul: (" + std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + ") * (" +
                                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                                    ")");
  }
  Matrix y = a.value() * b.value();
  return rec(std::move(y), {a, b}, [a, b](const Matrix &g, std::span<Matrix *const> pg) {
    if (pg[0]) *pg[0] += g * b.value().transpose();
    if (pg[1]) *pg[1] += a.value().transpose() * g;
  });
}

Tensor transpose(const Tensor &a) {
  Matrix y = a.value().transpose();
  return rec(std::move(y), {a}, [](const Matrix &g, std::span<Matrix *const> pg) {
    *pg[0] += g.transpose();
  });
}

Tensor add(const Tensor &a, const Tensor &b) {
  same_shape(a, b, "add");
  return rec(a.value() + b.value(), {a, b}, [](const Matrix &g, std::span<Matrix *const> pg) {
    if (pg[0]) *pg[0] += g;
    if (pg[1]) *pg[1] += g;
  });
}

Tensor sub(const Tensor &a, const Tensor &b) {
  same_shape(a, b, "sub");
  return rec(a.value() - b.value(), {a, b}, [](const Matrix &g, std::span<Matrix *const> pg) {
    if (pg[0]) *pg[0] += g;
    if (pg[1]) *pg[1] -= g;
  });
}

Tensor mul(const Tensor &a, const Tensor &b) {
  same_shape(a, b, "mul");
  Matrix y = a.value().cwiseProduct(b.value());
  return rec(std::move(y), {a, b}, [a, b](const Matrix &g, std::span<Matrix *const> pg) {
    if (pg[0]) *pg[0] += g.cwiseProduct(b.value());
    if (pg[1]) *pg[1] += g.cwiseProduct(a.value());
  });
}

Tensor add_row(const Tensor &a, const Tensor &row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    raise(ErrorKind::dimension, "add_row: row must be 1x" + std::to_string(a.cols()));
  }
  Matrix y = a.value().rowwise() + row.value().row(0);
  return rec(std::move(y), {a, row}, [](const Matrix &g, std::span<Matrix *const> pg) {
    if (pg[0]) *pg[0] += g;
    if (pg[1]) *pg[1] += g.colwise().sum();
  });
}

Tensor scale(const Tensor &a, double factor) {
  return rec(a.value() * factor, {a}, [factor](const Matrix &g, std::span<Matrix *const> pg) {
    *pg[0] += g * factor;
  });
}

Tensor add_scalar(const Tensor &a, double shift) {
  Matrix y = a.value().array() + shift;
  return rec(std::move(y), {a}, [](const Matrix &g, std::span<Matrix *const> pg) {
    *pg[0] += g;
  });
}

Tensor neg(const Tensor &a) { return scale(a, -1.0); }

Tensor leaky_relu(const Tensor &a, double alpha) {
  require(alpha > 0.0, ErrorKind::domain, "leaky_relu slope must be positive");
  return unary(
      a, [alpha](double x) { return x >= 0.0 ? x : alpha * x; },
      [alpha](double x) { return x >= 0.0 ? 1.0 : alpha; });
}

Tensor tanh(const Tensor &a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double x) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      });
}

namespace {
double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Tensor sigmoid(const Tensor &a) {
  return unary(
      a, [](double x) { return logistic(x); },
      [](double x) {
        const double s = logistic(x);
        return s * (1.0 - s);
      });
}

Tensor abs(const Tensor &a) {
  return unary(
      a, [](double x) { return std::abs(x); },
      [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor &a) {
  return unary(
      a, [](double x) { return x * x; }, [](double x) { return 2.0 * x; });
}

Tensor sqrt(const Tensor &a) {
  return unary(
      a, [](double x) { return std::sqrt(std::max(x, kEpsSqrt)); },
      [](double x) { return x > kEpsSqrt ? 0.5 / std::sqrt(x) : 0.0; });
}

Tensor exp(const Tensor &a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Tensor log(const Tensor &a) {
  for (Index i = 0; i < a.size(); ++i) {
    if (!(a.value().data()[i] > 0.0)) {
      raise(ErrorKind::domain, "log of a non-positive value");
    }
  }
  return unary(
      a, [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; });
}

Tensor sum(const Tensor &a) {
  nonempty(a, "sum");
  Matrix y(1, 1);
  y(0, 0) = a.value().sum();
  return rec(std::move(y), {a}, [](const Matrix &g, std::span<Matrix *const> pg) {
    pg[0]->array() += g(0, 0);
  });
}

Tensor mean(const Tensor &a) {
  nonempty(a, "mean");
  const double n = static_cast<double>(a.size());
  Matrix y(1, 1);
  y(0, 0) = a.value().sum() / n;
  return rec(std::move(y), {a}, [n](const Matrix &g, std::span<Matrix *const> pg) {
    pg[0]->array() += g(0, 0) / n;
  });
}

Tensor sum_rows(const Tensor &a) {
  nonempty(a, "sum_rows");
  Matrix y = a.value().rowwise().sum();
  return rec(std::move(y), {a}, [](const Matrix &g, std::span<Matrix *const> pg) {
    pg[0]->colwise() += g.col(0);
  });
}

Tensor l2_norm_rows(const Tensor &a) {
  nonempty(a, "l2_norm_rows");
  Matrix y = a.value().rowwise().norm();
  Matrix norms = y;
  return rec(std::move(y), {a}, [a, norms](const Matrix &g, std::span<Matrix *const> pg) {
    const Matrix &x = a.value();
    for (Index i = 0; i < x.rows(); ++i) {
      const double denom = std::max(norms(i, 0), kEpsNorm);
      pg[0]->row(i) += (g(i, 0) / denom) * x.row(i);
    }
  });
}

Tensor l1_norm_rows(const Tensor &a) {
  nonempty(a, "l1_norm_rows");
  Matrix y = a.value().cwiseAbs().rowwise().sum();
  return rec(std::move(y), {a}, [a](const Matrix &g, std::span<Matrix *const> pg) {
    const Matrix &x = a.value();
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < x.cols(); ++j) {
        const double v = x(i, j);
        (*pg[0])(i, j) += g(i, 0) * (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0));
      }
    }
  });
}

Tensor slice_cols(const Tensor &a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.cols()) {
    raise(ErrorKind::dimension, "slice_cols out of range");
  }
  Matrix y = a.value().middleCols(begin, count);
  return rec(std::move(y), {a}, [begin, count](const Matrix &g, std::span<Matrix *const> pg) {
    pg[0]->middleCols(begin, count) += g;
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  require(!parts.empty(), ErrorKind::domain, "concat_cols of nothing");
  const Index rows = parts[0].rows();
  Index cols = 0;
  for (const auto &p : parts) {
    require(p.rows() == rows, ErrorKind::dimension, "concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix y(rows, cols);
  std::vector<Index> offsets;
  Index off = 0;
  for (const auto &p : parts) {
    y.middleCols(off, p.cols()) = p.value();
    offsets.push_back(off);
    off += p.cols();
  }
  std::vector<Index> widths;
  for (const auto &p : parts) widths.push_back(p.cols());
  return Tape::record(std::move(y), parts,
                      [offsets, widths](const Matrix &g, std::span<Matrix *const> pg) {
                        for (std::size_t k = 0; k < pg.size(); ++k) {
                          if (pg[k]) *pg[k] += g.middleCols(offsets[k], widths[k]);
                        }
                      });
}

Tensor repeat_rows(const Tensor &a, Index k) {
  require(k >= 1, ErrorKind::domain, "repeat_rows needs k >= 1");
  const Index m = a.rows();
  Matrix y(m * k, a.cols());
  for (Index i = 0; i < m; ++i) {
    for (Index r = 0; r < k; ++r) {
      y.row(i * k + r) = a.value().row(i);
    }
  }
  return rec(std::move(y), {a}, [m, k](const Matrix &g, std::span<Matrix *const> pg) {
    for (Index i = 0; i < m; ++i) {
      for (Index r = 0; r < k; ++r) {
        pg[0]->row(i) += g.row(i * k + r);
      }
    }
  });
}

Tensor solve(const Tensor &a, const Tensor &b) {
  auto lu = std::make_shared<LuFactorization>(lu_decompose(a.value()));
  Matrix x = lu_solve(*lu, b.value());
  Matrix x_copy = x;
  return rec(std::move(x), {a, b}, [lu, x_copy](const Matrix &g, std::span<Matrix *const> pg) {
    const Matrix gb = lu_solve_transposed(*lu, g);
    if (pg[1]) *pg[1] += gb;
    if (pg[0]) *pg[0] -= gb * x_copy.transpose();
  });
}

Tensor log_abs_det(const Tensor &a) {
  auto lu = std::make_shared<LuFactorization>(lu_decompose(a.value()));
  Matrix y(1, 1);
  y(0, 0) = lu->log_abs_det();
  return rec(std::move(y), {a}, [lu](const Matrix &g, std::span<Matrix *const> pg) {
    const Index n = lu->dim();
    *pg[0] += g(0, 0) * lu_solve_transposed(*lu, Matrix::Identity(n, n));
  });
}

}  // namespace eflow::diffcore
