#include "converse/autodiff.hpp"

#include "converse/error.hpp"
#include "converse/simd/kernels.hpp"

namespace converse {

const Tensor& Var::value() const { return graph_->value(*this); }

Tensor Var::grad() const { return graph_->grad(*this); }

Var Graph::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Graph::input(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = recording_;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Graph::parameter(Parameter& p) {
  Node n;
  n.value = p.value;
  if (recording_ && p.trainable) {
    n.needs_grad = true;
    n.parameter = &p;
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Graph::record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward) {
  bool needs = false;
  if (recording_) {
    for (const Var& p : parents) needs = needs || nodes_[p.id()].needs_grad;
  }
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs;
  if (needs) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Graph::record(Tensor value, const std::vector<Var>& parents, BackwardFn backward) {
  bool needs = false;
  if (recording_) {
    for (const Var& p : parents) needs = needs || nodes_[p.id()].needs_grad;
  }
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs;
  if (needs) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Tensor& Graph::grad_buffer(Var v) {
  Node& n = nodes_[v.id()];
  if (!n.has_grad) {
    n.grad = Tensor::zeros_like(n.value);
    n.has_grad = true;
  }
  return n.grad;
}

Tensor Graph::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  return n.has_grad ? n.grad : Tensor::zeros_like(n.value);
}

void Graph::backward(Var loss) {
  if (loss.graph() != this) throw Error("backward: variable belongs to another graph");
  if (value(loss).size() != 1) throw ShapeMismatch("backward: loss must be a single value");
  if (!nodes_[loss.id()].needs_grad) return;
  grad_buffer(loss)[0] += 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad) continue;
    if (n.backward) {
      n.backward(*this, n.grad);
    } else if (n.parameter != nullptr) {
      Parameter& p = *n.parameter;
      if (p.grad.size() != p.value.size()) p.grad = Tensor::zeros_like(p.value);
      simd::axpy(1.0, n.grad.values(), p.grad.values());
    }
  }
}

}  // namespace converse
