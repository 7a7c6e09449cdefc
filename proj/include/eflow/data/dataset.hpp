#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eflow/core/matrix.hpp"

namespace eflow::data {

/// Map between raw data columns and the columns a model sees:
/// standardization, zero padding, then a column permutation.
struct DataTransform {
  Index raw_dim = 0;
  /// Per raw column. A column with std 0 was dropped and is restored as its mean.
  RowVector means;
  RowVector stds;
  /// Number of zero columns appended after standardization.
  Index padding = 0;
  /// Model column j takes padded column permutation[j]. Empty means identity.
  std::vector<Index> permutation;

  static DataTransform identity(Index d);

  bool is_identity() const;
  std::vector<Index> kept_columns() const;
  Index standardized_dim() const;
  Index model_dim() const { return standardized_dim() + padding; }

  Matrix to_model(const Matrix &raw) const;
  Matrix to_raw(const Matrix &model) const;
};

struct Dataset {
  std::string name;
  /// Column names of the raw data; empty when the source had no header.
  std::vector<std::string> names;
  /// Rows in model space, i.e. transform.to_model(raw rows).
  Matrix points;
  DataTransform transform;

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }
};

Dataset make_dataset(Matrix raw, std::string name = {}, std::vector<std::string> names = {});

enum class ConstantColumns { error, drop };

/// Z-scores every column with the sample (n-1) standard deviation. Requires
/// an untransformed dataset with at least two rows.
Dataset standardize(const Dataset &raw, ConstantColumns policy = ConstantColumns::error);

/// Pushes an untransformed dataset through a transform fitted elsewhere
/// (typically on the training split).
Dataset apply_transform(const Dataset &raw, const DataTransform &transform);

/// Appends zero columns until the width is a multiple of block_size.
Dataset pad_to_block_multiple(const Dataset &ds, Index block_size);

/// Reorders columns so that model column j is current column order[j].
Dataset permute_columns(const Dataset &ds, std::vector<Index> order);

struct SplitSpec {
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Split {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Seeded shuffle followed by contiguous cuts. Train and validation sizes
/// are rounded, the test split takes the remainder.
Split split(const Dataset &ds, const SplitSpec &spec);

Dataset select_rows(const Dataset &ds, const std::vector<Index> &rows);

}  // namespace eflow::data
