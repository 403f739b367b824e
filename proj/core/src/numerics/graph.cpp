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

#include "skimnet/numerics/graph.hpp"

#include <string>

#include "skimnet/error.hpp"

namespace skimnet::numerics {

const Tensor& Var::value() const { return graph_->value(id_); }

Var Graph::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::param(Param& p) {
  Node node;
  node.external = &p.value;
  node.requires_grad = record_;
  if (record_) {
    Param* target = &p;
    node.backward = [target](Graph& g, std::size_t self) {
      const Tensor& gr = g.grad(self);
      double* dst = target->grad.data();
      for (std::size_t i = 0; i < gr.size(); ++i) dst[i] += gr[i];
    };
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::frozen(const Param& p) {
  Node node;
  node.external = &p.value;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Graph::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

const Tensor& Graph::grad(std::size_t id) const { return nodes_[id].grad; }

bool Graph::requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

Tensor& Graph::grad_accumulator(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(value(id).shape());
  return n.grad;
}

Var Graph::emit(std::string_view op, Tensor value, std::initializer_list<Var> inputs,
                BackwardFn fn) {
  if (!value.all_finite()) {
    throw NumericError(std::string(op) + " produced non-finite values");
  }
  Node node;
  node.value = std::move(value);
  if (record_) {
    for (const Var& v : inputs) {
      if (v.graph_ != this) throw ValidationError(std::string(op) + ": input from another graph");
      if (nodes_[v.id_].requires_grad) node.requires_grad = true;
    }
    if (node.requires_grad) node.backward = std::move(fn);
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Graph::backward(Var loss) {
  if (!record_) throw ValidationError("backward() on a graph that does not record");
  if (loss.graph_ != this || value(loss.id_).size() != 1) {
    throw DimensionError("backward() needs a scalar loss from this graph");
  }
  grad_accumulator(loss.id_)[0] = 1.0;
  for (std::size_t id = loss.id_ + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, id);
  }
}

}  // namespace skimnet::numerics
