#include "eflow/flows/ref.hpp"

#include <cmath>

#include "eflow/core/error.hpp"

namespace eflow::flows {

namespace ops = diffcore;

void RectangularFlow::validate() const {
  require(widths.size() >= 2, ErrorKind::config, "rectangular flow needs at least two widths");
  require(leaky_alpha > 0.0, ErrorKind::config, "leaky_relu slope must be > 0");
  require(activity_weight >= 0.0, ErrorKind::config, "activity weight must be >= 0");
  for (std::size_t i = 0; i < widths.size(); ++i) {
    require(widths[i] >= 1, ErrorKind::config, "widths must be >= 1");
    if (i > 0 && widths[i] < widths[i - 1]) {
      raise(ErrorKind::config, "rectangular widths must be nondecreasing");
    }
  }
  if (layers.size() + 1 != widths.size()) raise(ErrorKind::config, "layer count does not match widths");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto &layer = layers[l];
    if (layer.weight.rows() != widths[l + 1] || layer.weight.cols() != widths[l] ||
        layer.bias.rows() != 1 || layer.bias.cols() != widths[l + 1]) {
      raise(ErrorKind::dimension, "layer " + std::to_string(l) + " does not match its widths");
    }
    if (layer.activation == Activation::sigmoid && l + 1 != layers.size()) {
      raise(ErrorKind::config, "sigmoid is only allowed as the final activation");
    }
  }
}

std::vector<Matrix *> RectangularFlow::parameters() {
  std::vector<Matrix *> out;
  for (auto &layer : layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<Matrix> RectangularFlow::parameter_values() const {
  std::vector<Matrix> out;
  for (const auto &layer : layers) {
    out.push_back(layer.weight);
    out.push_back(layer.bias);
  }
  return out;
}

std::vector<Index> default_ref_widths(Index d) {
  require(d >= 1, ErrorKind::config, "data dimension must be >= 1");
  return {std::max<Index>(1, d / 8), std::max<Index>(1, d / 4), std::max<Index>(1, d / 2), d};
}

RectangularFlow make_ref(const RefConfig &cfg, Engine &engine) {
  RectangularFlow model;
  model.widths = cfg.widths;
  model.activity_weight = cfg.activity_weight;
  model.leaky_alpha = cfg.leaky_alpha;
  require(cfg.widths.size() >= 2, ErrorKind::config, "rectangular flow needs at least two widths");
  for (std::size_t l = 0; l + 1 < cfg.widths.size(); ++l) {
    const Index in = cfg.widths[l];
    const Index out = cfg.widths[l + 1];
    require(in >= 1 && out >= 1, ErrorKind::config, "widths must be >= 1");
    DenseLayer layer;
    layer.weight = standard_normal(out, in, engine) / std::sqrt(static_cast<double>(in)) +
                   Matrix::Identity(out, in);
    layer.bias = Matrix::Zero(1, out);
    layer.activation = l + 2 == cfg.widths.size() ? cfg.final : cfg.hidden;
    model.layers.push_back(std::move(layer));
  }
  model.validate();
  return model;
}

FlowOutput ref_forward(const RectangularFlow &model, std::span<const Tensor> params,
                       const Tensor &z) {
  if (params.size() != 2 * model.layers.size()) {
    raise(ErrorKind::contract, "parameter list does not match the flow");
  }
  if (z.cols() != model.latent_dim()) {
    raise(ErrorKind::dimension, "latent width " + std::to_string(z.cols()) + " does not match " +
                                    std::to_string(model.latent_dim()));
  }
  Tensor x = z;
  Tensor penalty(Matrix::Zero(1, 1));
  double penalty_count = 0.0;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Tensor a = affine(x, params[2 * l], params[2 * l + 1]);
    const Activation act = model.layers[l].activation;
    if (model.activity_weight > 0.0 && (act == Activation::tanh || act == Activation::sigmoid)) {
      penalty = ops::add(penalty, ops::sum(ops::square(a)));
      penalty_count += static_cast<double>(a.size());
    }
    x = activate(a, act, model.leaky_alpha);
  }
  if (penalty_count > 0.0) penalty = ops::scale(penalty, model.activity_weight / penalty_count);
  return {x, penalty};
}

Matrix ref_forward(const RectangularFlow &model, const Matrix &z) {
  const auto params = constants(model.parameter_values());
  return ref_forward(model, params, Tensor(z)).y.value();
}

}  // namespace eflow::flows
