#pragma once

#include <span>
#include <vector>

#include "eflow/diffcore/ops.hpp"
#include "eflow/flows/dif.hpp"

namespace eflow::flows {

/// Feed-forward widening map from a small latent space to the data space.
/// It has no inverse and no likelihood; it is trained by two-sample losses.
struct RectangularFlow {
  /// widths.front() is the latent width, widths.back() the data width.
  std::vector<Index> widths;
  std::vector<DenseLayer> layers;
  double activity_weight = 0.0;
  double leaky_alpha = diffcore::kDefaultLeakyAlpha;

  Index latent_dim() const { return widths.front(); }
  Index data_dim() const { return widths.back(); }

  void validate() const;
  std::vector<Matrix *> parameters();
  std::vector<Matrix> parameter_values() const;
};

/// Width schedule d/8, d/4, d/2, d (each at least 1).
std::vector<Index> default_ref_widths(Index d);

struct RefConfig {
  std::vector<Index> widths;
  Activation hidden = Activation::leaky_relu;
  Activation final = Activation::identity;
  double activity_weight = 0.0;
  double leaky_alpha = diffcore::kDefaultLeakyAlpha;
};

/// Weights start at N(0, 1 / fan_in) plus an embedding of the identity,
/// biases at 0.
RectangularFlow make_ref(const RefConfig &cfg, Engine &engine);

FlowOutput ref_forward(const RectangularFlow &model, std::span<const Tensor> params,
                       const Tensor &z);
Matrix ref_forward(const RectangularFlow &model, const Matrix &z);

}  // namespace eflow::flows
