#include "eflow/flows/model.hpp"

#include "eflow/core/error.hpp"
#include "eflow/diffcore/linalg.hpp"

namespace eflow::flows {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

void check_layers(const DenseInvertibleFlow &flow, const std::string &where) {
  for (std::size_t l = 0; l < flow.layers.size(); ++l) {
    try {
      diffcore::lu_decompose(flow.effective_weight(l));
    } catch (const Error &e) {
      raise(e.kind(), where + "layer " + std::to_string(l) + ": " + e.message());
    }
  }
}

}  // namespace

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::dif: return "dif";
    case Architecture::ref: return "ref";
    case Architecture::saef: return "saef";
  }
  return "unknown";
}

Architecture parse_architecture(const std::string &name) {
  if (name == "dif") return Architecture::dif;
  if (name == "ref") return Architecture::ref;
  if (name == "saef") return Architecture::saef;
  raise(ErrorKind::config, "unknown architecture '" + name + "'");
}

Architecture architecture(const FlowModel &model) {
  return static_cast<Architecture>(model.index());
}

Index data_dim(const FlowModel &model) {
  return std::visit(overloaded{[](const DenseInvertibleFlow &m) { return m.dim; },
                               [](const RectangularFlow &m) { return m.data_dim(); },
                               [](const SemiAutoregressiveFlow &m) { return m.dim(); }},
                    model);
}

Index latent_dim(const FlowModel &model) {
  return std::visit(overloaded{[](const DenseInvertibleFlow &m) { return m.dim; },
                               [](const RectangularFlow &m) { return m.latent_dim(); },
                               [](const SemiAutoregressiveFlow &m) { return m.dim(); }},
                    model);
}

bool is_invertible(const FlowModel &model) {
  return !std::holds_alternative<RectangularFlow>(model);
}

std::vector<Matrix *> parameters(FlowModel &model) {
  return std::visit([](auto &m) { return m.parameters(); }, model);
}

std::vector<Matrix> parameter_values(const FlowModel &model) {
  return std::visit([](const auto &m) { return m.parameter_values(); }, model);
}

void validate(const FlowModel &model) {
  std::visit([](const auto &m) { m.validate(); }, model);
}

std::vector<bool> bias_mask(const FlowModel &model) {
  return std::visit(
      overloaded{[](const SemiAutoregressiveFlow &m) {
                   std::vector<bool> mask;
                   for (Index b = 0; b < m.block_count(); ++b) {
                     mask.insert(mask.end(), b == 0 ? 1 : 4, false);
                     for (std::size_t l = 0; l < m.transformers[b].layers.size(); ++l) {
                       mask.push_back(false);
                       mask.push_back(true);
                     }
                   }
                   return mask;
                 },
                 [](const auto &m) {
                   std::vector<bool> mask;
                   for (std::size_t l = 0; l < m.layers.size(); ++l) {
                     mask.push_back(false);
                     mask.push_back(true);
                   }
                   return mask;
                 }},
      model);
}

Matrix generate(const FlowModel &model, const Matrix &z, SaefStats *stats) {
  return std::visit(
      overloaded{[&](const DenseInvertibleFlow &m) { return dif_forward(m, z).y; },
                 [&](const RectangularFlow &m) { return ref_forward(m, z); },
                 [&](const SemiAutoregressiveFlow &m) { return saef_sample(m, z, stats); }},
      model);
}

Matrix invert(const FlowModel &model, const Matrix &y, SaefStats *stats) {
  return std::visit(
      overloaded{[&](const DenseInvertibleFlow &m) { return dif_inverse(m, y); },
                 [&](const RectangularFlow &) -> Matrix {
                   raise(ErrorKind::capability, "rectangular flows have no inverse");
                 },
                 [&](const SemiAutoregressiveFlow &m) { return saef_inverse(m, y, stats); }},
      model);
}

Vector log_likelihood(const FlowModel &model, const Matrix &y) {
  return std::visit(
      overloaded{[&](const DenseInvertibleFlow &m) { return dif_log_likelihood(m, y); },
                 [&](const RectangularFlow &) -> Vector {
                   raise(ErrorKind::capability, "rectangular flows have no likelihood");
                 },
                 [&](const SemiAutoregressiveFlow &m) { return saef_log_likelihood(m, y); }},
      model);
}

void check_nonsingular(const FlowModel &model) {
  std::visit(overloaded{[](const DenseInvertibleFlow &m) { check_layers(m, ""); },
                        [](const RectangularFlow &) {},
                        [](const SemiAutoregressiveFlow &m) {
                          for (Index b = 0; b < m.block_count(); ++b) {
                            check_layers(m.transformers[b], "block " + std::to_string(b) + " ");
                          }
                        }},
             model);
}

Matrix latent_interpolate(const FlowModel &model, const RowVector &y_a, const RowVector &y_b,
                          Index steps) {
  require(steps >= 2, ErrorKind::config, "interpolation needs at least 2 steps");
  if (y_a.size() != data_dim(model) || y_b.size() != data_dim(model)) {
    raise(ErrorKind::dimension, "endpoints do not match the model dimension");
  }
  Matrix ends(2, y_a.size());
  ends.row(0) = y_a;
  ends.row(1) = y_b;
  const Matrix z = invert(model, ends);
  Matrix path(steps, z.cols());
  for (Index i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps - 1);
    path.row(i) = (1.0 - t) * z.row(0) + t * z.row(1);
  }
  return generate(model, path);
}

}  // namespace eflow::flows
