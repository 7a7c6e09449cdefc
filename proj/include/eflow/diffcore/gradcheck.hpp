#pragma once

#include <functional>
#include <span>
#include <vector>

#include "eflow/diffcore/tensor.hpp"

namespace eflow::diffcore {

/// Scalar function of one or more parameter tensors. It must build its result
/// only from the tensors it is given, so the same body can run on a tape (for
/// the analytic gradient) and on plain constants (for finite differences).
using ScalarFn = std::function<Tensor(std::span<const Tensor>)>;

/// Central-difference check of backward(). Returns the largest entrywise
/// |a - n| / max(1, |a|, |n|) over all parameters, where a is the analytic
/// and n the numeric derivative.
double finite_difference_check(const ScalarFn &f, std::span<const Matrix> params,
                               double h = 1e-5);

double finite_difference_check(const std::function<Tensor(const Tensor &)> &f,
                               const Matrix &theta, double h = 1e-5);

}  // namespace eflow::diffcore
