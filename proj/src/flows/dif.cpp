#include "eflow/flows/dif.hpp"

#include <cmath>
#include <numbers>

#include "eflow/core/error.hpp"
#include "eflow/diffcore/linalg.hpp"

namespace eflow::flows {

namespace ops = diffcore;

void DenseInvertibleFlow::validate() const {
  require(dim >= 1, ErrorKind::config, "flow dimension must be >= 1");
  require(!layers.empty(), ErrorKind::config, "flow needs at least one layer");
  require(sigma >= 0.0, ErrorKind::config, "sigma must be >= 0");
  require(activity_weight >= 0.0, ErrorKind::config, "activity weight must be >= 0");
  require(leaky_alpha > 0.0, ErrorKind::config, "leaky_relu slope must be > 0");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto &layer = layers[l];
    if (layer.weight.rows() != dim || layer.weight.cols() != dim || layer.bias.rows() != 1 ||
        layer.bias.cols() != dim) {
      raise(ErrorKind::dimension, "layer " + std::to_string(l) + " is not square in the flow dimension");
    }
    if (layer.activation == Activation::sigmoid && l + 1 != layers.size()) {
      raise(ErrorKind::config, "sigmoid is only allowed as the final activation");
    }
  }
}

std::vector<Matrix *> DenseInvertibleFlow::parameters() {
  std::vector<Matrix *> out;
  for (auto &layer : layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<Matrix> DenseInvertibleFlow::parameter_values() const {
  std::vector<Matrix> out;
  for (const auto &layer : layers) {
    out.push_back(layer.weight);
    out.push_back(layer.bias);
  }
  return out;
}

Matrix DenseInvertibleFlow::effective_weight(std::size_t layer) const {
  return layers.at(layer).weight + sigma * Matrix::Identity(dim, dim);
}

DenseInvertibleFlow make_dif(const DifConfig &cfg, Engine &engine) {
  DenseInvertibleFlow model;
  model.dim = cfg.dim;
  model.sigma = cfg.sigma;
  model.activity_weight = cfg.activity_weight;
  model.leaky_alpha = cfg.leaky_alpha;
  require(cfg.layers >= 1, ErrorKind::config, "flow needs at least one layer");
  require(cfg.dim >= 1, ErrorKind::config, "flow dimension must be >= 1");
  const double scale = cfg.init_scale / std::sqrt(static_cast<double>(cfg.dim));
  for (int l = 0; l < cfg.layers; ++l) {
    DenseLayer layer;
    layer.weight = scale * standard_normal(cfg.dim, cfg.dim, engine) +
                   (1.0 - cfg.sigma) * Matrix::Identity(cfg.dim, cfg.dim);
    layer.bias = Matrix::Zero(1, cfg.dim);
    layer.activation = l + 1 == cfg.layers ? cfg.final : cfg.hidden;
    model.layers.push_back(std::move(layer));
  }
  model.validate();
  return model;
}

namespace {

void check_params(const DenseInvertibleFlow &model, std::size_t count) {
  if (count != 2 * model.layers.size()) {
    raise(ErrorKind::contract, "parameter list does not match the flow");
  }
}

bool saturating(Activation a) { return a == Activation::tanh || a == Activation::sigmoid; }

Tensor layer_shift(const Tensor *shift, Index layer, Index dim) {
  return ops::slice_cols(*shift, layer * dim, dim);
}

}  // namespace

FlowOutput dif_forward(const DenseInvertibleFlow &model, std::span<const Tensor> params,
                       const Tensor &z, const Tensor *shift) {
  check_params(model, params.size());
  const Index d = model.dim;
  if (z.cols() != d) raise(ErrorKind::dimension, "latent width does not match the flow");
  const auto n_layers = static_cast<Index>(model.layers.size());
  if (shift != nullptr && shift->cols() != n_layers * d) {
    raise(ErrorKind::dimension, "bias shift width does not match the flow");
  }
  const Tensor identity(model.sigma * Matrix::Identity(d, d));
  Tensor x = z;
  Tensor penalty(Matrix::Zero(1, 1));
  double penalty_count = 0.0;
  for (Index l = 0; l < n_layers; ++l) {
    const Tensor w = ops::add(params[2 * l], identity);
    const Tensor sl = shift != nullptr ? layer_shift(shift, l, d) : Tensor();
    const Tensor a = affine(x, w, params[2 * l + 1], shift != nullptr ? &sl : nullptr);
    const Activation act = model.layers[l].activation;
    if (model.activity_weight > 0.0 && saturating(act)) {
      penalty = ops::add(penalty, ops::sum(ops::square(a)));
      penalty_count += static_cast<double>(a.size());
    }
    x = activate(a, act, model.leaky_alpha);
  }
  if (penalty_count > 0.0) penalty = ops::scale(penalty, model.activity_weight / penalty_count);
  return {x, penalty};
}

DifResult dif_forward(const DenseInvertibleFlow &model, const Matrix &z) {
  const auto params = constants(model.parameter_values());
  const FlowOutput out = dif_forward(model, params, Tensor(z));
  return {out.y.value(), out.penalty.scalar()};
}

Matrix dif_inverse(const DenseInvertibleFlow &model, const Matrix &y, const Matrix *shift) {
  const Index d = model.dim;
  if (y.cols() != d) raise(ErrorKind::dimension, "data width does not match the flow");
  const auto n_layers = static_cast<Index>(model.layers.size());
  if (shift != nullptr && shift->cols() != n_layers * d) {
    raise(ErrorKind::dimension, "bias shift width does not match the flow");
  }
  Matrix x = y;
  for (Index l = n_layers - 1; l >= 0; --l) {
    const auto &layer = model.layers[l];
    Matrix a = inverse_activation(x, layer.activation, model.leaky_alpha);
    a.rowwise() -= layer.bias.row(0);
    if (shift != nullptr) {
      const auto block = shift->middleCols(l * d, d);
      if (shift->rows() == 1) {
        a.rowwise() -= block.row(0);
      } else {
        a -= block;
      }
    }
    const auto lu = diffcore::lu_decompose(model.effective_weight(l));
    x = diffcore::lu_solve(lu, a.transpose()).transpose();
  }
  return x;
}

Tensor standard_normal_log_density(const Tensor &z) {
  const double c = -0.5 * static_cast<double>(z.cols()) * std::log(2.0 * std::numbers::pi);
  return ops::add_scalar(ops::scale(ops::sum_rows(ops::square(z)), -0.5), c);
}

Tensor dif_log_likelihood(const DenseInvertibleFlow &model, std::span<const Tensor> params,
                          const Tensor &y, const Tensor *shift) {
  check_params(model, params.size());
  const Index d = model.dim;
  if (y.cols() != d) raise(ErrorKind::dimension, "data width does not match the flow");
  const auto n_layers = static_cast<Index>(model.layers.size());
  if (shift != nullptr && shift->cols() != n_layers * d) {
    raise(ErrorKind::dimension, "bias shift width does not match the flow");
  }
  const Tensor identity(model.sigma * Matrix::Identity(d, d));
  Tensor x = y;
  Tensor jacobian(Matrix::Zero(y.rows(), 1));
  for (Index l = n_layers - 1; l >= 0; --l) {
    const Activation act = model.layers[l].activation;
    jacobian = ops::sub(jacobian, log_activation_slope(x, act, model.leaky_alpha));
    Tensor a = ops::add_row(inverse_activation(x, act, model.leaky_alpha),
                            ops::neg(params[2 * l + 1]));
    if (shift != nullptr) {
      const Tensor sl = ops::neg(layer_shift(shift, l, d));
      a = sl.rows() == 1 ? ops::add_row(a, sl) : ops::add(a, sl);
    }
    const Tensor w = ops::add(params[2 * l], identity);
    x = ops::transpose(ops::solve(w, ops::transpose(a)));
    jacobian = ops::add_row(jacobian, ops::neg(ops::log_abs_det(w)));
  }
  return ops::add(standard_normal_log_density(x), jacobian);
}

Vector dif_log_likelihood(const DenseInvertibleFlow &model, const Matrix &y) {
  const auto params = constants(model.parameter_values());
  return dif_log_likelihood(model, params, Tensor(y)).value().col(0);
}

}  // namespace eflow::flows
