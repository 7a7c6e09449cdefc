#pragma once

#include <string>
#include <variant>
#include <vector>

#include "eflow/flows/dif.hpp"
#include "eflow/flows/ref.hpp"
#include "eflow/flows/saef.hpp"

namespace eflow::flows {

using FlowModel = std::variant<DenseInvertibleFlow, RectangularFlow, SemiAutoregressiveFlow>;

enum class Architecture { dif, ref, saef };

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string &name);
Architecture architecture(const FlowModel &model);

Index data_dim(const FlowModel &model);
Index latent_dim(const FlowModel &model);
bool is_invertible(const FlowModel &model);

std::vector<Matrix *> parameters(FlowModel &model);
std::vector<Matrix> parameter_values(const FlowModel &model);
void validate(const FlowModel &model);
/// True for the entries of parameters() that are transformer or layer biases.
std::vector<bool> bias_mask(const FlowModel &model);

/// Latent codes to data space.
Matrix generate(const FlowModel &model, const Matrix &z, SaefStats *stats = nullptr);
/// Data space to latent codes; capability error for rectangular flows.
Matrix invert(const FlowModel &model, const Matrix &y, SaefStats *stats = nullptr);
/// Capability error for rectangular flows.
Vector log_likelihood(const FlowModel &model, const Matrix &y);

/// LU-factorizes every effective weight; singular error names the layer.
void check_nonsingular(const FlowModel &model);

/// Inverts both endpoints, interpolates linearly in latent space at `steps`
/// equally spaced t in [0, 1] and maps every point back.
Matrix latent_interpolate(const FlowModel &model, const RowVector &y_a, const RowVector &y_b,
                          Index steps);

}  // namespace eflow::flows
