#include "eflow/flows/layers.hpp"

#include <algorithm>
#include <cmath>

#include "eflow/core/error.hpp"
#include "eflow/diffcore/ops.hpp"

namespace eflow::flows {

namespace ops = diffcore;
using diffcore::Tape;

std::string to_string(Activation a) {
  switch (a) {
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
  }
  return "unknown";
}

Activation parse_activation(const std::string &name) {
  if (name == "leaky_relu") return Activation::leaky_relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "identity") return Activation::identity;
  raise(ErrorKind::config, "unknown activation '" + name + "'");
}

Tensor activate(const Tensor &a, Activation act, double alpha) {
  switch (act) {
    case Activation::leaky_relu: return ops::leaky_relu(a, alpha);
    case Activation::tanh: return ops::tanh(a);
    case Activation::sigmoid: return ops::sigmoid(a);
    case Activation::identity: return a;
  }
  raise(ErrorKind::contract, "unknown activation");
}

Matrix activate(const Matrix &a, Activation act, double alpha) {
  if (act == Activation::identity) return a;
  return activate(Tensor(a), act, alpha).value();
}

namespace {

void check_range(const Matrix &y, Activation act) {
  if (act == Activation::sigmoid) {
    if (!((y.array() >= 0.0).all() && (y.array() <= 1.0).all())) {
      raise(ErrorKind::domain, "sigmoid output outside [0, 1]");
    }
  } else if (act == Activation::tanh) {
    if (!((y.array() >= -1.0).all() && (y.array() <= 1.0).all())) {
      raise(ErrorKind::domain, "tanh output outside [-1, 1]");
    }
  }
}

// Clamped argument of the inverse; `clamped` reports whether the clamp bit.
double clamp_output(double y, Activation act, bool &clamped) {
  double lo = -1.0, hi = 1.0;
  if (act == Activation::sigmoid) {
    lo = kEpsSigmoid;
    hi = 1.0 - kEpsSigmoid;
  } else if (act == Activation::tanh) {
    lo = -1.0 + kEpsTanh;
    hi = 1.0 - kEpsTanh;
  } else {
    clamped = false;
    return y;
  }
  const double c = std::clamp(y, lo, hi);
  clamped = c != y;
  return c;
}

double inverse_value(double y, Activation act, double alpha) {
  switch (act) {
    case Activation::leaky_relu: return y < 0.0 ? y / alpha : y;
    case Activation::tanh: return std::atanh(y);
    case Activation::sigmoid: return std::log(y) - std::log1p(-y);
    case Activation::identity: return y;
  }
  return y;
}

}  // namespace

Matrix inverse_activation(const Matrix &y, Activation act, double alpha) {
  check_range(y, act);
  Matrix a(y.rows(), y.cols());
  bool clamped = false;
  for (Index i = 0; i < y.size(); ++i) {
    a.data()[i] = inverse_value(clamp_output(y.data()[i], act, clamped), act, alpha);
  }
  return a;
}

Tensor inverse_activation(const Tensor &y, Activation act, double alpha) {
  if (act == Activation::identity) return y;
  check_range(y.value(), act);
  Matrix a(y.rows(), y.cols());
  Matrix slope(y.rows(), y.cols());
  bool clamped = false;
  for (Index i = 0; i < y.size(); ++i) {
    const double c = clamp_output(y.value().data()[i], act, clamped);
    a.data()[i] = inverse_value(c, act, alpha);
    double d = 1.0;
    switch (act) {
      case Activation::leaky_relu: d = c < 0.0 ? 1.0 / alpha : 1.0; break;
      case Activation::tanh: d = 1.0 / (1.0 - c * c); break;
      case Activation::sigmoid: d = 1.0 / (c * (1.0 - c)); break;
      case Activation::identity: break;
    }
    slope.data()[i] = clamped ? 0.0 : d;
  }
  const Tensor parents[] = {y};
  return Tape::record(std::move(a), parents,
                      [slope = std::move(slope)](const Matrix &g, std::span<Matrix *const> pg) {
                        *pg[0] += g.cwiseProduct(slope);
                      });
}

Tensor log_activation_slope(const Tensor &y, Activation act, double alpha) {
  const Index m = y.rows();
  if (act == Activation::identity) return Tensor(Matrix::Zero(m, 1));
  check_range(y.value(), act);
  Matrix value = Matrix::Zero(m, 1);
  Matrix grad = Matrix::Zero(y.rows(), y.cols());
  bool clamped = false;
  for (Index r = 0; r < m; ++r) {
    for (Index c = 0; c < y.cols(); ++c) {
      const double v = clamp_output(y.value()(r, c), act, clamped);
      switch (act) {
        case Activation::leaky_relu:
          value(r, 0) += v < 0.0 ? std::log(alpha) : 0.0;
          break;
        case Activation::tanh:
          value(r, 0) += std::log1p(-v * v);
          grad(r, c) = clamped ? 0.0 : -2.0 * v / (1.0 - v * v);
          break;
        case Activation::sigmoid:
          value(r, 0) += std::log(v) + std::log1p(-v);
          grad(r, c) = clamped ? 0.0 : 1.0 / v - 1.0 / (1.0 - v);
          break;
        case Activation::identity: break;
      }
    }
  }
  const Tensor parents[] = {y};
  return Tape::record(std::move(value), parents,
                      [grad = std::move(grad)](const Matrix &g, std::span<Matrix *const> pg) {
                        *pg[0] += (grad.array().colwise() * g.col(0).array()).matrix();
                      });
}

Tensor affine(const Tensor &x, const Tensor &weight, const Tensor &bias, const Tensor *shift) {
  Tensor a = ops::add_row(ops::matmul(x, ops::transpose(weight)), bias);
  if (shift == nullptr) return a;
  return shift->rows() == 1 ? ops::add_row(a, *shift) : ops::add(a, *shift);
}

std::vector<Tensor> constants(std::span<const Matrix> values) {
  std::vector<Tensor> out;
  out.reserve(values.size());
  for (const auto &v : values) out.emplace_back(v);
  return out;
}

}  // namespace eflow::flows
