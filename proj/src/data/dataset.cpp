#include "eflow/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "eflow/core/error.hpp"
#include "eflow/core/rng.hpp"

namespace eflow::data {

DataTransform DataTransform::identity(Index d) {
  DataTransform t;
  t.raw_dim = d;
  t.means = RowVector::Zero(d);
  t.stds = RowVector::Ones(d);
  return t;
}

bool DataTransform::is_identity() const {
  return padding == 0 && permutation.empty() && (means.array() == 0.0).all() &&
         (stds.array() == 1.0).all();
}

std::vector<Index> DataTransform::kept_columns() const {
  std::vector<Index> kept;
  for (Index c = 0; c < raw_dim; ++c) {
    if (stds(c) > 0.0) kept.push_back(c);
  }
  return kept;
}

Index DataTransform::standardized_dim() const {
  return static_cast<Index>(kept_columns().size());
}

Matrix DataTransform::to_model(const Matrix &raw) const {
  if (raw.cols() != raw_dim) {
    raise(ErrorKind::dimension, "data has " + std::to_string(raw.cols()) +
                                    " columns, transform expects " + std::to_string(raw_dim));
  }
  const auto kept = kept_columns();
  const Index width = static_cast<Index>(kept.size());
  Matrix padded = Matrix::Zero(raw.rows(), width + padding);
  for (Index j = 0; j < width; ++j) {
    const Index c = kept[j];
    padded.col(j) = (raw.col(c).array() - means(c)) / stds(c);
  }
  if (permutation.empty()) return padded;
  Matrix out(padded.rows(), padded.cols());
  for (Index j = 0; j < out.cols(); ++j) out.col(j) = padded.col(permutation[j]);
  return out;
}

Matrix DataTransform::to_raw(const Matrix &model) const {
  if (model.cols() != model_dim()) {
    raise(ErrorKind::dimension, "model rows have " + std::to_string(model.cols()) +
                                    " columns, transform expects " + std::to_string(model_dim()));
  }
  Matrix padded(model.rows(), model.cols());
  if (permutation.empty()) {
    padded = model;
  } else {
    for (Index j = 0; j < model.cols(); ++j) padded.col(permutation[j]) = model.col(j);
  }
  Matrix raw(model.rows(), raw_dim);
  Index j = 0;
  for (Index c = 0; c < raw_dim; ++c) {
    if (stds(c) > 0.0) {
      raw.col(c) = padded.col(j++).array() * stds(c) + means(c);
    } else {
      raw.col(c).setConstant(means(c));
    }
  }
  return raw;
}

Dataset make_dataset(Matrix raw, std::string name, std::vector<std::string> names) {
  if (!names.empty() && static_cast<Index>(names.size()) != raw.cols()) {
    raise(ErrorKind::dimension, "column names do not match data width");
  }
  Dataset ds;
  ds.name = std::move(name);
  ds.names = std::move(names);
  ds.transform = DataTransform::identity(raw.cols());
  ds.points = std::move(raw);
  return ds;
}

Dataset standardize(const Dataset &raw, ConstantColumns policy) {
  require(raw.transform.is_identity(), ErrorKind::contract,
          "standardize expects an untransformed dataset");
  const Index n = raw.size();
  if (n < 2) raise(ErrorKind::sample_size, "standardize needs at least 2 rows");
  DataTransform t = DataTransform::identity(raw.dim());
  for (Index c = 0; c < raw.dim(); ++c) {
    const double mean = raw.points.col(c).mean();
    const double var =
        (raw.points.col(c).array() - mean).square().sum() / static_cast<double>(n - 1);
    t.means(c) = mean;
    t.stds(c) = std::sqrt(var);
    if (!(t.stds(c) > 0.0)) {
      const std::string label = raw.names.empty() ? std::to_string(c) : raw.names[c];
      if (policy == ConstantColumns::error) {
        raise(ErrorKind::ingestion, "column " + label + " is constant");
      }
      t.stds(c) = 0.0;
    }
  }
  if (t.standardized_dim() == 0) raise(ErrorKind::ingestion, "every column is constant");
  return apply_transform(raw, t);
}

Dataset apply_transform(const Dataset &raw, const DataTransform &transform) {
  require(raw.transform.is_identity(), ErrorKind::contract,
          "apply_transform expects an untransformed dataset");
  Dataset out = raw;
  out.points = transform.to_model(raw.points);
  out.transform = transform;
  return out;
}

Dataset pad_to_block_multiple(const Dataset &ds, Index block_size) {
  require(block_size >= 1, ErrorKind::config, "block size must be >= 1");
  require(ds.transform.permutation.empty(), ErrorKind::contract,
          "pad before permuting columns");
  const Index extra = (block_size - ds.dim() % block_size) % block_size;
  Dataset out = ds;
  if (extra == 0) return out;
  out.points.conservativeResize(Eigen::NoChange, ds.dim() + extra);
  out.points.rightCols(extra).setZero();
  out.transform.padding += extra;
  return out;
}

Dataset permute_columns(const Dataset &ds, std::vector<Index> order) {
  const Index d = ds.dim();
  if (static_cast<Index>(order.size()) != d) {
    raise(ErrorKind::dimension, "permutation length does not match data width");
  }
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  for (Index v : order) {
    if (v < 0 || v >= d || seen[v]) raise(ErrorKind::config, "column order is not a permutation");
    seen[v] = true;
  }
  Dataset out = ds;
  for (Index j = 0; j < d; ++j) out.points.col(j) = ds.points.col(order[j]);
  auto &perm = out.transform.permutation;
  if (perm.empty()) {
    perm = std::move(order);
  } else {
    std::vector<Index> composed(static_cast<std::size_t>(d));
    for (Index j = 0; j < d; ++j) composed[j] = perm[order[j]];
    perm = std::move(composed);
  }
  return out;
}

void SplitSpec::validate() const {
  for (double f : {train_fraction, val_fraction, test_fraction}) {
    if (!(f > 0.0 && f < 1.0)) raise(ErrorKind::config, "split fractions must lie in (0, 1)");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-12) {
    raise(ErrorKind::config, "split fractions must sum to 1");
  }
}

Dataset select_rows(const Dataset &ds, const std::vector<Index> &rows) {
  Dataset out = ds;
  out.points.resize(static_cast<Index>(rows.size()), ds.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.points.row(static_cast<Index>(i)) = ds.points.row(rows[i]);
  }
  return out;
}

Split split(const Dataset &ds, const SplitSpec &spec) {
  spec.validate();
  const Index n = ds.size();
  if (n < 3) raise(ErrorKind::config, "split needs at least 3 rows");
  const auto n_train = static_cast<Index>(std::llround(spec.train_fraction * n));
  const auto n_val = static_cast<Index>(std::llround(spec.val_fraction * n));
  const Index n_test = n - n_train - n_val;
  if (n_train < 1 || n_val < 1 || n_test < 1) {
    raise(ErrorKind::config, "split fractions leave an empty split for n=" + std::to_string(n));
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Engine engine(spec.seed);
  for (Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(order[i], order[pick(engine)]);
  }
  const auto cut = [&](Index from, Index count) {
    return select_rows(ds, std::vector<Index>(order.begin() + from, order.begin() + from + count));
  };
  return Split{cut(0, n_train), cut(n_train, n_val), cut(n_train + n_val, n_test)};
}

}  // namespace eflow::data
