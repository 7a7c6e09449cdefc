#pragma once

#include <cstdint>
#include <vector>

#include "eflow/core/matrix.hpp"

namespace eflow::diffcore {

inline constexpr double kEpsPivot = 1e-12;

/// PA = LU with partial pivoting. L (unit lower) and U share storage in `lu`.
struct LuFactorization {
  Matrix lu;
  /// Row i of PA is row permutation[i] of A.
  std::vector<Index> permutation;
  /// Parity of the permutation, +1 or -1.
  int sign = 1;

  Index dim() const { return lu.rows(); }
  Matrix lower() const;
  Matrix upper() const;
  double log_abs_det() const;
  double det() const;
};

/// Throws a singular-matrix error when a pivot magnitude falls below
/// kEpsPivot, and a dimension error for non-square input.
LuFactorization lu_decompose(const Matrix &a);

/// X with A X = B.
Matrix lu_solve(const LuFactorization &lu, const Matrix &b);
/// X with A^T X = B.
Matrix lu_solve_transposed(const LuFactorization &lu, const Matrix &b);

/// Number of lu_decompose calls made by this process. Used to prove that a
/// code path is determinant-free.
std::uint64_t lu_decompose_count();

}  // namespace eflow::diffcore
