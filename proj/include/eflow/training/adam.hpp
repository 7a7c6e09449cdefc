#pragma once

#include <cstdint>
#include <vector>

#include "eflow/core/matrix.hpp"

namespace eflow::training {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamState {
  std::uint64_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;

  static AdamState zeros(const std::vector<Matrix *> &params);
};

/// Bias-corrected Adam update in place. Non-finite gradients are numeric
/// errors and leave parameters and state untouched.
void adam_step(const std::vector<Matrix *> &params, const std::vector<Matrix> &grads,
               AdamState &state, const AdamConfig &cfg);

/// Rescales the gradients so their joint l2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_global_norm(std::vector<Matrix> &grads, double max_norm);

}  // namespace eflow::training
