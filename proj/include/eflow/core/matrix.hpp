#pragma once

#include <Eigen/Dense>

namespace eflow {

// Row-major so that a batch of m points in R^d is an m x d matrix whose rows
// are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using Index = Eigen::Index;

}  // namespace eflow
