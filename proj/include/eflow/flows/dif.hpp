#pragma once

#include <span>
#include <vector>

#include "eflow/diffcore/ops.hpp"
#include "eflow/flows/layers.hpp"

namespace eflow::flows {

/// Stack of square dense layers. The optimizer sees the raw weights; the
/// map uses W + sigma I so that the identity component keeps layers well
/// away from singular.
struct DenseInvertibleFlow {
  Index dim = 0;
  std::vector<DenseLayer> layers;
  double sigma = 0.5;
  /// Weight of the mean squared pre-activation of tanh/sigmoid layers.
  double activity_weight = 0.0;
  double leaky_alpha = diffcore::kDefaultLeakyAlpha;

  void validate() const;
  /// Raw weight and bias of every layer, in layer order: W0, b0, W1, b1, ...
  std::vector<Matrix *> parameters();
  std::vector<Matrix> parameter_values() const;
  Matrix effective_weight(std::size_t layer) const;
};

struct DifConfig {
  Index dim = 2;
  int layers = 3;
  Activation hidden = Activation::leaky_relu;
  Activation final = Activation::identity;
  double sigma = 0.5;
  double activity_weight = 0.0;
  double leaky_alpha = diffcore::kDefaultLeakyAlpha;
  /// Std of the random part of each raw weight, divided by sqrt(dim).
  double init_scale = 0.1;
};

/// Effective weights start at I plus N(0, init_scale^2 / dim) noise, biases at 0.
DenseInvertibleFlow make_dif(const DifConfig &cfg, Engine &engine);

struct FlowOutput {
  Tensor y;
  /// 1 x 1 activity penalty (already multiplied by its weight).
  Tensor penalty;
};

/// Differentiable forward with the parameters bound to `params` (same order
/// as DenseInvertibleFlow::parameters). `shift` adds per-layer bias offsets:
/// columns [l*dim, (l+1)*dim) go to layer l; one row is broadcast.
FlowOutput dif_forward(const DenseInvertibleFlow &model, std::span<const Tensor> params,
                       const Tensor &z, const Tensor *shift = nullptr);

struct DifResult {
  Matrix y;
  double activity_penalty = 0.0;
};
DifResult dif_forward(const DenseInvertibleFlow &model, const Matrix &z);

/// Exact inverse, layer by layer.
Matrix dif_inverse(const DenseInvertibleFlow &model, const Matrix &y,
                   const Matrix *shift = nullptr);

/// Per-row log density (m x 1) under a standard normal prior, differentiable
/// with respect to the parameters and y.
Tensor dif_log_likelihood(const DenseInvertibleFlow &model, std::span<const Tensor> params,
                          const Tensor &y, const Tensor *shift = nullptr);
Vector dif_log_likelihood(const DenseInvertibleFlow &model, const Matrix &y);

/// Log density of a standard normal, per row, m x 1.
Tensor standard_normal_log_density(const Tensor &z);

}  // namespace eflow::flows
