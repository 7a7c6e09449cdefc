#include "eflow/losses/loss_spec.hpp"

#include <array>
#include <utility>

#include "eflow/core/error.hpp"

namespace eflow::losses {

namespace {

constexpr std::array<std::pair<Objective, const char *>, 9> kObjectiveNames = {{
    {Objective::energy, "energy"},
    {Objective::kernelized_energy, "kernelized_energy"},
    {Objective::sliced_energy, "sliced_energy"},
    {Objective::sliced_ks, "sliced_ks"},
    {Objective::sliced_hotelling, "sliced_hotelling"},
    {Objective::sliced_frechet, "sliced_frechet"},
    {Objective::hotelling, "hotelling"},
    {Objective::frechet, "frechet"},
    {Objective::quantile, "quantile"},
}};

}  // namespace

bool LossSpec::is_sliced() const {
  switch (objective) {
    case Objective::sliced_energy:
    case Objective::sliced_ks:
    case Objective::sliced_hotelling:
    case Objective::sliced_frechet:
      return true;
    default:
      return false;
  }
}

bool LossSpec::is_per_datum() const {
  return objective == Objective::energy || objective == Objective::kernelized_energy;
}

void LossSpec::validate() const {
  kernel.validate();
  if (is_sliced()) {
    require(slice.has_value(), ErrorKind::config, "sliced objectives need a slice config");
    require(slice->n_projections >= 1, ErrorKind::config, "n_projections must be >= 1");
  }
  if (objective == Objective::energy || objective == Objective::sliced_energy) {
    require(kernel.kind == KernelKind::euclidean_beta, ErrorKind::config,
            "energy objectives use the euclidean kernel");
  }
  if (objective == Objective::kernelized_energy) {
    require(kernel.is_similarity(), ErrorKind::config,
            "kernelized_energy needs an rbf or rbf_mixture kernel");
  }
}

std::string to_string(Objective objective) {
  for (const auto &[o, name] : kObjectiveNames) {
    if (o == objective) return name;
  }
  return "?";
}

Objective parse_objective(const std::string &text) {
  for (const auto &[o, name] : kObjectiveNames) {
    if (text == name) return o;
  }
  // Short names used in comparison tables.
  if (text == "ks") return Objective::sliced_ks;
  raise(ErrorKind::config, "unknown objective '" + text + "'");
}

std::string to_string(Pairing pairing) {
  return pairing == Pairing::u_statistic ? "u_statistic" : "paired";
}

Pairing parse_pairing(const std::string &text) {
  if (text == "u_statistic") return Pairing::u_statistic;
  if (text == "paired") return Pairing::paired;
  raise(ErrorKind::config, "unknown pairing '" + text + "'");
}

}  // namespace eflow::losses
