#pragma once

// Tape-style reverse-mode differentiation. A Graph owns every intermediate
// value created during one forward pass; backward() walks the tape in reverse
// creation order, which is a valid topological order by construction.

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <string>

#include "converse/tensor.hpp"

namespace converse {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
};

class Graph;

// Handle to a node in a Graph. Cheap to copy; valid while the Graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::uint32_t id) : graph_(graph), id_(id) {}

  Graph* graph() const noexcept { return graph_; }
  std::uint32_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }

  const Tensor& value() const;
  // Gradient after backward(); a zero tensor when none flowed here.
  Tensor grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Graph* graph_ = nullptr;
  std::uint32_t id_ = 0;
};

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const Tensor& out_grad)>;

  // With record_gradients=false every node is a constant: parameters bind by
  // value and no closures are kept. Used for evaluation passes.
  explicit Graph(bool record_gradients = true) : recording_(record_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // Differentiable leaf; its gradient can be read back after backward().
  Var input(Tensor value);
  // Leaf bound to a parameter; backward() accumulates into p.grad when
  // p.trainable is set.
  Var parameter(Parameter& p);

  Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward);
  Var record(Tensor value, const std::vector<Var>& parents, BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and propagates. Loss must hold one value.
  void backward(Var loss);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  bool needs_grad(Var v) const { return nodes_[v.id()].needs_grad; }
  bool recording() const noexcept { return recording_; }
  // Mutable gradient buffer for a parent node, zero-initialised on first use.
  Tensor& grad_buffer(Var v);
  Tensor grad(Var v) const;
  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    bool has_grad = false;
    BackwardFn backward;
    Parameter* parameter = nullptr;
  };

  bool recording_;
  std::deque<Node> nodes_;
};

}  // namespace converse
