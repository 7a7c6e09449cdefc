#include "eflow/flows/saef.hpp"

#include <cmath>
#include <numeric>

#include "eflow/core/error.hpp"

namespace eflow::flows {

namespace ops = diffcore;

BlockPartition BlockPartition::uniform(Index d, Index blocks) {
  require(d >= 1, ErrorKind::config, "dimension must be >= 1");
  if (blocks < 1 || blocks > d) {
    raise(ErrorKind::config, "block count must lie in [1, " + std::to_string(d) + "]");
  }
  BlockPartition p;
  for (Index b = 0; b < blocks; ++b) p.sizes.push_back(d / blocks + (b < d % blocks ? 1 : 0));
  return p;
}

Index BlockPartition::dim() const { return std::accumulate(sizes.begin(), sizes.end(), Index{0}); }

Index BlockPartition::start(Index block) const {
  return std::accumulate(sizes.begin(), sizes.begin() + block, Index{0});
}

void BlockPartition::validate() const {
  require(!sizes.empty(), ErrorKind::config, "partition needs at least one block");
  for (Index s : sizes) require(s >= 1, ErrorKind::config, "blocks must be nonempty");
}

namespace {

std::size_t conditioner_param_count(Index block) { return block == 0 ? 1 : 4; }

Index shift_width(const DenseInvertibleFlow &t) {
  return static_cast<Index>(t.layers.size()) * t.dim;
}

// Offsets of each block's parameters in the flat parameter list.
std::vector<std::size_t> block_offsets(const SemiAutoregressiveFlow &model) {
  std::vector<std::size_t> offsets;
  std::size_t at = 0;
  for (Index b = 0; b < model.block_count(); ++b) {
    offsets.push_back(at);
    at += conditioner_param_count(b) + 2 * model.transformers[b].layers.size();
  }
  offsets.push_back(at);
  return offsets;
}

Tensor conditioner_forward(const SemiAutoregressiveFlow &model, Index block,
                           std::span<const Tensor> params, const Tensor &prefix) {
  if (block == 0) return params[0];
  const double alpha = model.transformers[block].leaky_alpha;
  const Tensor hidden = ops::leaky_relu(affine(prefix, params[0], params[1]), alpha);
  return affine(hidden, params[2], params[3]);
}

std::span<const Tensor> conditioner_params(std::span<const Tensor> params,
                                           const std::vector<std::size_t> &offsets, Index b) {
  return params.subspan(offsets[b], conditioner_param_count(b));
}

std::span<const Tensor> transformer_params(std::span<const Tensor> params,
                                           const std::vector<std::size_t> &offsets, Index b) {
  const std::size_t begin = offsets[b] + conditioner_param_count(b);
  return params.subspan(begin, offsets[b + 1] - begin);
}

void count_call(SaefStats *stats, Index rows) {
  if (stats != nullptr) stats->conditioner_calls += static_cast<std::uint64_t>(rows);
}

Tensor prefix_of(const Matrix &x, Index width) {
  return Tensor(Matrix(x.leftCols(width)));
}

}  // namespace

void SemiAutoregressiveFlow::validate() const {
  partition.validate();
  const Index blocks = partition.count();
  if (static_cast<Index>(conditioners.size()) != blocks ||
      static_cast<Index>(transformers.size()) != blocks) {
    raise(ErrorKind::config, "one conditioner and one transformer per block required");
  }
  for (Index b = 0; b < blocks; ++b) {
    const auto &t = transformers[b];
    t.validate();
    if (t.dim != partition.sizes[b]) {
      raise(ErrorKind::dimension, "transformer " + std::to_string(b) + " does not match its block");
    }
    const auto &c = conditioners[b];
    const Index h = shift_width(t);
    if (c.b2.rows() != 1 || c.b2.cols() != h) {
      raise(ErrorKind::dimension, "conditioner " + std::to_string(b) + " output width mismatch");
    }
    if (b == 0) {
      require(c.is_constant(), ErrorKind::config, "first conditioner takes no input");
      continue;
    }
    const Index in = partition.start(b);
    const Index hidden = c.w1.rows();
    if (c.w1.cols() != in || hidden < 1 || c.b1.rows() != 1 || c.b1.cols() != hidden ||
        c.w2.rows() != h || c.w2.cols() != hidden) {
      raise(ErrorKind::dimension, "conditioner " + std::to_string(b) + " shape mismatch");
    }
  }
}

std::vector<Matrix *> SemiAutoregressiveFlow::parameters() {
  std::vector<Matrix *> out;
  for (Index b = 0; b < block_count(); ++b) {
    auto &c = conditioners[b];
    if (b > 0) {
      out.push_back(&c.w1);
      out.push_back(&c.b1);
      out.push_back(&c.w2);
    }
    out.push_back(&c.b2);
    for (auto *p : transformers[b].parameters()) out.push_back(p);
  }
  return out;
}

std::vector<Matrix> SemiAutoregressiveFlow::parameter_values() const {
  std::vector<Matrix> out;
  for (Index b = 0; b < block_count(); ++b) {
    const auto &c = conditioners[b];
    if (b > 0) {
      out.push_back(c.w1);
      out.push_back(c.b1);
      out.push_back(c.w2);
    }
    out.push_back(c.b2);
    for (auto &p : transformers[b].parameter_values()) out.push_back(std::move(p));
  }
  return out;
}

SemiAutoregressiveFlow make_saef(const SaefConfig &cfg, Engine &engine) {
  SemiAutoregressiveFlow model;
  model.partition = BlockPartition::uniform(cfg.dim, cfg.blocks);
  for (Index b = 0; b < model.block_count(); ++b) {
    DifConfig t = cfg.transformer;
    t.dim = model.partition.sizes[b];
    model.transformers.push_back(make_dif(t, engine));
    const Index h = shift_width(model.transformers.back());
    Conditioner c;
    c.b2 = Matrix::Zero(1, h);
    if (b > 0) {
      const Index in = model.partition.start(b);
      const Index hidden = t.dim;
      c.w1 = cfg.cond_init_scale / std::sqrt(static_cast<double>(in)) *
             standard_normal(hidden, in, engine);
      c.b1 = Matrix::Zero(1, hidden);
      c.w2 = Matrix::Zero(h, hidden);
    }
    model.conditioners.push_back(std::move(c));
  }
  model.validate();
  return model;
}

SaefBlocks saef_teacher_blocks(const SemiAutoregressiveFlow &model, std::span<const Tensor> params,
                               const Matrix &x, const Tensor &z, SaefStats *stats) {
  const Index d = model.dim();
  if (x.cols() != d || z.cols() != d) raise(ErrorKind::dimension, "teacher inputs must have width d");
  if (x.rows() != z.rows()) raise(ErrorKind::dimension, "data and latent rows are not aligned");
  const auto offsets = block_offsets(model);
  if (params.size() != offsets.back()) raise(ErrorKind::contract, "parameter list does not match the flow");
  SaefBlocks out;
  out.penalty = Tensor(Matrix::Zero(1, 1));
  for (Index b = 0; b < model.block_count(); ++b) {
    const Index start = model.partition.start(b);
    const Index size = model.partition.sizes[b];
    const Tensor h = conditioner_forward(model, b, conditioner_params(params, offsets, b),
                                         prefix_of(x, start));
    count_call(stats, z.rows());
    const FlowOutput y = dif_forward(model.transformers[b], transformer_params(params, offsets, b),
                                     ops::slice_cols(z, start, size), &h);
    out.blocks.push_back(y.y);
    out.penalty = ops::add(out.penalty, y.penalty);
  }
  return out;
}

std::vector<std::pair<Matrix, Matrix>> saef_forward_teacher(const SemiAutoregressiveFlow &model,
                                                            const Matrix &x, const Matrix &z,
                                                            const Matrix &z_prime,
                                                            SaefStats *stats) {
  if (z.rows() != z_prime.rows() || z.cols() != z_prime.cols()) {
    raise(ErrorKind::dimension, "latent copies differ in shape");
  }
  const auto params = constants(model.parameter_values());
  const auto first = saef_teacher_blocks(model, params, x, Tensor(z), stats);
  const auto second = saef_teacher_blocks(model, params, x, Tensor(z_prime), stats);
  std::vector<std::pair<Matrix, Matrix>> out;
  for (std::size_t b = 0; b < first.blocks.size(); ++b) {
    out.emplace_back(first.blocks[b].value(), second.blocks[b].value());
  }
  return out;
}

Matrix saef_sample(const SemiAutoregressiveFlow &model, const Matrix &z, SaefStats *stats) {
  const Index d = model.dim();
  if (z.cols() != d) raise(ErrorKind::dimension, "latent width does not match the flow");
  const auto params = constants(model.parameter_values());
  const auto offsets = block_offsets(model);
  Matrix y(z.rows(), d);
  for (Index b = 0; b < model.block_count(); ++b) {
    const Index start = model.partition.start(b);
    const Index size = model.partition.sizes[b];
    const Tensor h = conditioner_forward(model, b, conditioner_params(params, offsets, b),
                                         prefix_of(y, start));
    count_call(stats, z.rows());
    const FlowOutput out = dif_forward(model.transformers[b], transformer_params(params, offsets, b),
                                       Tensor(Matrix(z.middleCols(start, size))), &h);
    y.middleCols(start, size) = out.y.value();
  }
  return y;
}

Matrix saef_inverse(const SemiAutoregressiveFlow &model, const Matrix &y, SaefStats *stats) {
  const Index d = model.dim();
  if (y.cols() != d) raise(ErrorKind::dimension, "data width does not match the flow");
  const auto params = constants(model.parameter_values());
  const auto offsets = block_offsets(model);
  Matrix z(y.rows(), d);
  for (Index b = 0; b < model.block_count(); ++b) {
    const Index start = model.partition.start(b);
    const Index size = model.partition.sizes[b];
    const Matrix h = conditioner_forward(model, b, conditioner_params(params, offsets, b),
                                         prefix_of(y, start))
                         .value();
    count_call(stats, y.rows());
    try {
      z.middleCols(start, size) =
          dif_inverse(model.transformers[b], Matrix(y.middleCols(start, size)), &h);
    } catch (const Error &e) {
      raise(e.kind(), "block " + std::to_string(b) + ": " + e.message());
    }
  }
  return z;
}

Tensor saef_log_likelihood(const SemiAutoregressiveFlow &model, std::span<const Tensor> params,
                           const Matrix &y) {
  const Index d = model.dim();
  if (y.cols() != d) raise(ErrorKind::dimension, "data width does not match the flow");
  const auto offsets = block_offsets(model);
  if (params.size() != offsets.back()) raise(ErrorKind::contract, "parameter list does not match the flow");
  Tensor total(Matrix::Zero(y.rows(), 1));
  for (Index b = 0; b < model.block_count(); ++b) {
    const Index start = model.partition.start(b);
    const Index size = model.partition.sizes[b];
    const Tensor h = conditioner_forward(model, b, conditioner_params(params, offsets, b),
                                         prefix_of(y, start));
    try {
      total = ops::add(total, dif_log_likelihood(model.transformers[b],
                                                 transformer_params(params, offsets, b),
                                                 Tensor(Matrix(y.middleCols(start, size))), &h));
    } catch (const Error &e) {
      raise(e.kind(), "block " + std::to_string(b) + ": " + e.message());
    }
  }
  return total;
}

Vector saef_log_likelihood(const SemiAutoregressiveFlow &model, const Matrix &y) {
  const auto params = constants(model.parameter_values());
  return saef_log_likelihood(model, params, y).value().col(0);
}

}  // namespace eflow::flows
