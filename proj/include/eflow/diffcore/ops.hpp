#pragma once

#include <span>

#include "eflow/diffcore/tensor.hpp"

namespace eflow::diffcore {

/// Lower clamp on ||x|| inside the Euclidean-norm backward rule. At x = 0 the
/// gradient is defined to be zero.
inline constexpr double kEpsNorm = 1e-12;
/// sqrt is evaluated as sqrt(max(x, kEpsSqrt)).
inline constexpr double kEpsSqrt = 1e-12;
inline constexpr double kDefaultLeakyAlpha = 0.01;

// Linear algebra.
Tensor matmul(const Tensor &a, const Tensor &b);
Tensor transpose(const Tensor &a);

// Binary elementwise (shapes must match).
Tensor add(const Tensor &a, const Tensor &b);
Tensor sub(const Tensor &a, const Tensor &b);
Tensor mul(const Tensor &a, const Tensor &b);

/// a (m x n) plus row (1 x n) added to every row.
Tensor add_row(const Tensor &a, const Tensor &row);

// Unary elementwise.
Tensor scale(const Tensor &a, double factor);
Tensor add_scalar(const Tensor &a, double shift);
Tensor neg(const Tensor &a);
Tensor leaky_relu(const Tensor &a, double alpha = kDefaultLeakyAlpha);
Tensor tanh(const Tensor &a);
Tensor sigmoid(const Tensor &a);
Tensor abs(const Tensor &a);
Tensor square(const Tensor &a);
Tensor sqrt(const Tensor &a);
Tensor exp(const Tensor &a);
Tensor log(const Tensor &a);

// Reductions. Empty inputs are a domain error.
Tensor sum(const Tensor &a);
Tensor mean(const Tensor &a);
/// Per-row sums, m x 1.
Tensor sum_rows(const Tensor &a);
/// Per-row Euclidean norms, m x 1.
Tensor l2_norm_rows(const Tensor &a);
/// Per-row l1 norms, m x 1.
Tensor l1_norm_rows(const Tensor &a);

// Shape manipulation.
Tensor slice_cols(const Tensor &a, Index begin, Index count);
Tensor concat_cols(std::span<const Tensor> parts);
/// Repeats each row k times consecutively: row i lands on rows [i*k, i*k+k).
Tensor repeat_rows(const Tensor &a, Index k);

// Differentiable dense solves (LU with partial pivoting underneath).
/// X with A X = B.
Tensor solve(const Tensor &a, const Tensor &b);
/// log |det A| as a 1x1 tensor.
Tensor log_abs_det(const Tensor &a);

}  // namespace eflow::diffcore
