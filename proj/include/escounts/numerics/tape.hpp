/*
 * Copyright 2026 The escounts Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string_view>
#include <vector>

#include "escounts/numerics/tensor.hpp"

namespace escounts {

template <typename T>
class BasicTape;

// Handle to a value recorded on a tape. Cheap to copy; valid while the tape lives.
template <typename T>
struct BasicVar {
  BasicTape<T>* tape = nullptr;
  std::size_t id = 0;

  const BasicTensor<T>& value() const { return tape->value(*this); }
  const Shape& shape() const { return value().shape(); }
};

// Define-by-run reverse-mode tape. Nodes are appended in evaluation order, so
// creation order is a topological order and Backward() walks it in reverse.
// Single-threaded; build a fresh tape per step.
template <typename T>
class BasicTape {
 public:
  using Var = BasicVar<T>;
  using TensorT = BasicTensor<T>;
  // Receives the gradient flowing into the node's output and the output itself.
  using BackwardFn = std::function<void(BasicTape&, const TensorT& grad, const TensorT& out)>;

  BasicTape() = default;
  BasicTape(const BasicTape&) = delete;
  BasicTape& operator=(const BasicTape&) = delete;

  Var Leaf(TensorT value, bool requires_grad = true) {
    CheckFinite(value, "leaf");
    nodes_.push_back(Node{std::move(value), TensorT{}, nullptr, requires_grad, false});
    return Var{this, nodes_.size() - 1};
  }
  Var Constant(TensorT value) { return Leaf(std::move(value), false); }

  // Records an op output. The backward closure is dropped when no input needs
  // a gradient.
  Var Record(std::string_view op, TensorT value, std::initializer_list<Var> inputs, BackwardFn fn) {
    return Record(op, std::move(value), std::vector<Var>(inputs), std::move(fn));
  }
  Var Record(std::string_view op, TensorT value, const std::vector<Var>& inputs, BackwardFn fn) {
    CheckFinite(value, op);
    bool needs = false;
    for (const Var& v : inputs) {
      if (v.tape != this) throw std::invalid_argument("variable belongs to a different tape");
      needs = needs || nodes_[v.id].requires_grad;
    }
    nodes_.push_back(Node{std::move(value), TensorT{}, needs ? std::move(fn) : nullptr, needs, false});
    return Var{this, nodes_.size() - 1};
  }

  const TensorT& value(Var v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  bool NeedsGrad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Gradient of the last Backward() loss w.r.t. v; zeros if v was unreachable.
  TensorT grad(Var v) const {
    const Node& n = nodes_.at(v.id);
    if (!n.has_grad) return TensorT(n.value.shape());
    return n.grad;
  }

  // Accumulation buffer for node id, allocated as zeros on first use.
  TensorT& MutableGrad(std::size_t id) {
    Node& n = nodes_[id];
    if (!n.has_grad) {
      n.grad = TensorT(n.value.shape());
      n.has_grad = true;
    }
    return n.grad;
  }

  void Backward(Var loss) {
    if (loss.tape != this) throw std::invalid_argument("loss belongs to a different tape");
    if (value(loss).size() != 1) {
      throw ShapeError("backward needs a scalar loss, got " + ShapeToString(value(loss).shape()));
    }
    for (Node& n : nodes_) {
      n.has_grad = false;
      n.grad = TensorT{};
    }
    MutableGrad(loss.id)[0] = T(1);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.has_grad || !n.backward) continue;
      n.backward(*this, n.grad, n.value);
    }
  }

 private:
  struct Node {
    TensorT value;
    TensorT grad;
    BackwardFn backward;
    bool requires_grad;
    bool has_grad;
  };

  static void CheckFinite(const TensorT& t, std::string_view op) {
    if (!t.AllFinite()) throw NumericError("non-finite value produced by " + std::string(op));
  }

  // deque keeps value() references stable while the tape grows
  std::deque<Node> nodes_;
};

using Tape = BasicTape<float>;
using Var = BasicVar<float>;
using TapeD = BasicTape<double>;
using VarD = BasicVar<double>;

}  // namespace escounts
