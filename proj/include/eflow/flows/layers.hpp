#pragma once

#include <span>
#include <string>
#include <vector>

#include "eflow/core/matrix.hpp"
#include "eflow/core/rng.hpp"
#include "eflow/diffcore/tensor.hpp"

namespace eflow::flows {

using diffcore::Tensor;

enum class Activation { leaky_relu, tanh, sigmoid, identity };

std::string to_string(Activation a);
Activation parse_activation(const std::string &name);

/// Logit inputs are clamped to [kEpsSigmoid, 1 - kEpsSigmoid].
inline constexpr double kEpsSigmoid = 1e-6;
/// atanh inputs are clamped to |x| <= 1 - kEpsTanh.
inline constexpr double kEpsTanh = 1e-9;

/// Affine map followed by an activation: y = act(x W^T + b).
/// weight is d_out x d_in, bias is 1 x d_out.
struct DenseLayer {
  Matrix weight;
  Matrix bias;
  Activation activation = Activation::identity;
};

Tensor activate(const Tensor &a, Activation act, double alpha);
Matrix activate(const Matrix &a, Activation act, double alpha);

/// Inverse of the activation, evaluated on its output. Sigmoid outputs
/// outside [0, 1] and tanh outputs outside [-1, 1] are domain errors.
Matrix inverse_activation(const Matrix &y, Activation act, double alpha);

/// Differentiable inverse activation with respect to y.
Tensor inverse_activation(const Tensor &y, Activation act, double alpha);

/// Row sums of log|act'(a)| where a = act^{-1}(y), as an m x 1 tensor,
/// differentiable with respect to y.
Tensor log_activation_slope(const Tensor &y, Activation act, double alpha);

/// Pre-activation a = x W^T + b, with an optional additive shift that is
/// either one row (broadcast) or one row per sample.
Tensor affine(const Tensor &x, const Tensor &weight, const Tensor &bias, const Tensor *shift = nullptr);

/// Converts matrices to constant tensors.
std::vector<Tensor> constants(std::span<const Matrix> values);

}  // namespace eflow::flows
