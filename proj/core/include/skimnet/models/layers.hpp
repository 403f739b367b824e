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
#include <string>
#include <unordered_map>
#include <vector>

#include "skimnet/numerics/graph.hpp"
#include "skimnet/numerics/ops.hpp"
#include "skimnet/numerics/param_store.hpp"
#include "skimnet/rng.hpp"

namespace skimnet::models {

using numerics::Graph;
using numerics::Param;
using numerics::ParamStore;
using numerics::Tensor;
using numerics::Var;

/// Adds "<name>.W" [out x in] and "<name>.b" [out], uniform in +-1/sqrt(in).
void init_dense(ParamStore& store, const std::string& name, std::size_t out, std::size_t in, Rng& rng);

/// Maps parameters onto graph leaves, once per parameter per graph. A frozen
/// binder never produces gradients.
class Binder {
 public:
  Binder(Graph& graph, bool trainable) : graph_(&graph), trainable_(trainable) {}

  Var operator()(Param& p);
  Var operator()(const Param& p);
  Graph& graph() const { return *graph_; }
  bool trainable() const { return trainable_; }

 private:
  Graph* graph_;
  bool trainable_;
  std::unordered_map<const Param*, Var> cache_;
};

/// Weight-only layer: adds "<name>.W".
void init_linear(ParamStore& store, const std::string& name, std::size_t out, std::size_t in, Rng& rng);

/// x W^T (+ b for dense) with the named layer's parameters. The const
/// overloads bind frozen leaves.
Var linear(Binder& bind, ParamStore& store, const std::string& name, Var x);
Var linear(Binder& bind, const ParamStore& store, const std::string& name, Var x);
Var dense(Binder& bind, ParamStore& store, const std::string& name, Var x);
Var dense(Binder& bind, const ParamStore& store, const std::string& name, Var x);

/// Stack of dense layers "<prefix>.0", "<prefix>.1", ... with ReLU between.
Var mlp(Binder& bind, ParamStore& store, const std::string& prefix, std::size_t layers, Var x);
Var mlp(Binder& bind, const ParamStore& store, const std::string& prefix, std::size_t layers, Var x);

/// Throws DimensionError unless the store holds `name` with the given shape.
void require_shape(const ParamStore& store, const std::string& name, const numerics::Shape& shape);

}  // namespace skimnet::models
