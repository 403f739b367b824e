// Copyright 2026 The SkimNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <string_view>

#include "skimnet/numerics/param_store.hpp"
#include "skimnet/numerics/tensor.hpp"

namespace skimnet::numerics {

class Graph;

/// Handle to a node on a Graph's tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Graph& graph() const { return *graph_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape. Each forward op appends a node holding its value and,
/// when recording and some input needs a gradient, a closure that pushes the
/// node's gradient to its inputs. backward() replays closures in reverse
/// creation order, so the graph may be built dynamically.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const noexcept { return record_; }

  Var constant(Tensor value);
  /// Trainable leaf; backward() accumulates into p.grad. p must outlive the graph
  /// and its value must not change while the graph is alive.
  Var param(Param& p);
  /// Leaf that reads p.value but never receives a gradient.
  Var frozen(const Param& p);

  /// Seeds d(loss)/d(loss) = 1 and propagates. loss must hold one element.
  void backward(Var loss);

  const Tensor& value(std::size_t id) const;
  /// Gradient of node id after backward(); zero-shaped when unreached.
  const Tensor& grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const;
  /// Zero-initialized on first access.
  Tensor& grad_accumulator(std::size_t id);

  /// Appends an op result. Throws NumericError when value holds NaN/Inf.
  Var emit(std::string_view op, Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
  };

  bool record_;
  std::deque<Node> nodes_;
};

}  // namespace skimnet::numerics
