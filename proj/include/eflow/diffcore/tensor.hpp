#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "eflow/core/matrix.hpp"

namespace eflow::diffcore {

class Tape;

using NodeId = std::int64_t;
inline constexpr NodeId kNoNode = -1;

/// A dense matrix value, optionally bound to a node of a gradient tape.
///
/// Tensors without a tape are immutable constants and can be shared freely.
/// Tensors recorded on a tape are only valid for the lifetime of that tape.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Matrix value);

  const Matrix &value() const { return *value_; }
  Index rows() const { return value_->rows(); }
  Index cols() const { return value_->cols(); }
  Index size() const { return value_->size(); }

  Tape *tape() const { return tape_; }
  NodeId node() const { return node_; }
  bool on_tape() const { return tape_ != nullptr; }
  bool requires_grad() const;

  double scalar() const;

 private:
  friend class Tape;
  Tensor(std::shared_ptr<const Matrix> value, Tape *tape, NodeId node);

  std::shared_ptr<const Matrix> value_;
  Tape *tape_ = nullptr;
  NodeId node_ = kNoNode;
};

/// Backward rule of one recorded primitive. `grad_out` is the accumulated
/// gradient of the node; `parent_grads[i]` is null when parent i does not
/// require a gradient, otherwise the rule adds its contribution into it.
using BackwardFn =
    std::function<void(const Matrix &grad_out, std::span<Matrix *const> parent_grads)>;

/// Gradients of a scalar root with respect to every recorded leaf that
/// requires a gradient.
class GradientMap {
 public:
  bool empty() const { return grads_.empty(); }
  std::size_t size() const { return grads_.size(); }
  bool contains(const Tensor &t) const;
  /// Gradient for `t`, or zeros of the right shape when the root does not
  /// depend on it.
  Matrix get(const Tensor &t) const;

 private:
  friend class Tape;
  std::unordered_map<NodeId, Matrix> grads_;
};

/// Ordered record of primitive operations. A fresh tape is built for every
/// training step; nodes are appended in evaluation order, so parents always
/// precede their children.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  /// Trainable leaf.
  Tensor parameter(Matrix value);

  /// Records the output of a primitive. If no parent requires a gradient the
  /// result is returned as a constant and nothing is recorded.
  static Tensor record(Matrix value, std::span<const Tensor> parents, BackwardFn backward);

  GradientMap backward(const Tensor &root);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<NodeId> parents;
    BackwardFn backward;
    bool requires_grad = false;
    bool is_leaf = false;
    Index rows = 0;
    Index cols = 0;
  };

  Tensor append(std::shared_ptr<const Matrix> value, Node node);

  std::vector<Node> nodes_;
};

}  // namespace eflow::diffcore
