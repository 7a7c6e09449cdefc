#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "eflow/losses/kernel.hpp"

namespace eflow::losses {

enum class Objective {
  energy,
  kernelized_energy,
  sliced_energy,
  sliced_ks,
  sliced_hotelling,
  sliced_frechet,
  hotelling,
  frechet,
  quantile,
};

/// How the model-vs-model term of an energy score is estimated: all distinct
/// pairs (U-statistic), or the first half of the samples paired with the
/// second half as independent copies.
enum class Pairing { u_statistic, paired };

enum class ProjectionLaw { standard_normal };

struct SliceConfig {
  int n_projections = 200;
  ProjectionLaw law = ProjectionLaw::standard_normal;
  std::uint64_t seed = 0;
};

struct LossSpec {
  Objective objective = Objective::energy;
  KernelSpec kernel = KernelSpec::euclidean(1.0);
  std::optional<SliceConfig> slice;
  Pairing pairing = Pairing::u_statistic;

  bool is_sliced() const;
  /// Objectives scored per datum against a set of model samples, as opposed
  /// to a batch-vs-batch two-sample statistic.
  bool is_per_datum() const;
  void validate() const;
};

std::string to_string(Objective objective);
Objective parse_objective(const std::string &text);
std::string to_string(Pairing pairing);
Pairing parse_pairing(const std::string &text);

}  // namespace eflow::losses
