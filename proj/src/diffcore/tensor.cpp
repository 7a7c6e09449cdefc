#include "eflow/diffcore/tensor.hpp"

#include <optional>

#include "eflow/core/error.hpp"

namespace eflow::diffcore {

Tensor::Tensor() : value_(std::make_shared<const Matrix>()) {}

Tensor::Tensor(Matrix value) : value_(std::make_shared<const Matrix>(std::move(value))) {
  require(value_->allFinite(), ErrorKind::numeric, "tensor holds non-finite entries");
}

Tensor::Tensor(std::shared_ptr<const Matrix> value, Tape *tape, NodeId node)
    : value_(std::move(value)), tape_(tape), node_(node) {}

bool Tensor::requires_grad() const { return tape_ != nullptr; }

double Tensor::scalar() const {
  require(rows() == 1 && cols() == 1, ErrorKind::contract, "tensor is not 1x1");
  return (*value_)(0, 0);
}

bool GradientMap::contains(const Tensor &t) const {
  return t.on_tape() && grads_.count(t.node()) > 0;
}

Matrix GradientMap::get(const Tensor &t) const {
  if (t.on_tape()) {
    auto it = grads_.find(t.node());
    if (it != grads_.end()) {
      return it->second;
    }
  }
  return Matrix::Zero(t.rows(), t.cols());
}

Tensor Tape::parameter(Matrix value) {
  require(value.allFinite(), ErrorKind::numeric, "parameter holds non-finite entries");
  Node node;
  node.requires_grad = true;
  node.is_leaf = true;
  node.rows = value.rows();
  node.cols = value.cols();
  return append(std::make_shared<const Matrix>(std::move(value)), std::move(node));
}

Tensor Tape::append(std::shared_ptr<const Matrix> value, Node node) {
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(std::move(node));
  return Tensor(std::move(value), this, id);
}

Tensor Tape::record(Matrix value, std::span<const Tensor> parents, BackwardFn backward) {
  if (!value.allFinite()) {
    raise(ErrorKind::numeric, "operation produced non-finite values");
  }
  Tape *tape = nullptr;
  for (const auto &p : parents) {
    if (p.on_tape()) {
      if (tape != nullptr && tape != p.tape()) {
        raise(ErrorKind::contract, "operands recorded on different tapes");
      }
      tape = p.tape();
    }
  }
  if (tape == nullptr) {
    return Tensor(std::move(value));
  }
  Node node;
  node.requires_grad = true;
  node.rows = value.rows();
  node.cols = value.cols();
  node.backward = std::move(backward);
  node.parents.reserve(parents.size());
  for (const auto &p : parents) {
    node.parents.push_back(p.on_tape() ? p.node() : kNoNode);
  }
  return tape->append(std::make_shared<const Matrix>(std::move(value)), std::move(node));
}

GradientMap Tape::backward(const Tensor &root) {
  require(root.rows() == 1 && root.cols() == 1, ErrorKind::contract,
          "backward() needs a 1x1 root");
  GradientMap result;
  if (!root.on_tape()) {
    return result;
  }
  require(root.tape() == this, ErrorKind::contract, "root belongs to another tape");

  const auto root_id = root.node();
  std::vector<std::optional<Matrix>> grads(static_cast<std::size_t>(root_id) + 1);
  grads[root_id] = Matrix::Ones(1, 1);

  std::vector<Matrix *> parent_slots;
  for (NodeId id = root_id; id >= 0; --id) {
    auto &g = grads[id];
    if (!g) {
      continue;
    }
    const Node &node = nodes_[id];
    if (node.is_leaf) {
      result.grads_.emplace(id, std::move(*g));
      g.reset();
      continue;
    }
    parent_slots.assign(node.parents.size(), nullptr);
    for (std::size_t k = 0; k < node.parents.size(); ++k) {
      const NodeId pid = node.parents[k];
      if (pid == kNoNode) {
        continue;
      }
      auto &pg = grads[pid];
      if (!pg) {
        pg = Matrix::Zero(nodes_[pid].rows, nodes_[pid].cols);
      }
      parent_slots[k] = &*pg;
    }
    node.backward(*g, parent_slots);
    g.reset();
  }
  return result;
}

}  // namespace eflow::diffcore
