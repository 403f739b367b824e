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

#include "skimnet/models/layers.hpp"

#include <cmath>
#include <random>

#include "skimnet/error.hpp"

namespace skimnet::models {

void init_dense(ParamStore& store, const std::string& name, std::size_t out, std::size_t in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor w({out, in});
  for (double& v : w.values()) v = u(rng);
  Tensor b({out});
  for (double& v : b.values()) v = u(rng);
  store.add(name + ".W", std::move(w));
  store.add(name + ".b", std::move(b));
}

Var Binder::operator()(Param& p) {
  auto it = cache_.find(&p);
  if (it != cache_.end()) return it->second;
  Var v = trainable_ ? graph_->param(p) : graph_->frozen(p);
  cache_.emplace(&p, v);
  return v;
}

Var Binder::operator()(const Param& p) {
  auto it = cache_.find(&p);
  if (it != cache_.end()) return it->second;
  Var v = graph_->frozen(p);
  cache_.emplace(&p, v);
  return v;
}

void init_linear(ParamStore& store, const std::string& name, std::size_t out, std::size_t in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor w({out, in});
  for (double& v : w.values()) v = u(rng);
  store.add(name + ".W", std::move(w));
}

Var linear(Binder& bind, ParamStore& store, const std::string& name, Var x) {
  return numerics::linear_apply(x, bind(store.get(name + ".W")));
}

Var linear(Binder& bind, const ParamStore& store, const std::string& name, Var x) {
  return numerics::linear_apply(x, bind(store.get(name + ".W")));
}

Var dense(Binder& bind, ParamStore& store, const std::string& name, Var x) {
  return numerics::affine_apply(x, bind(store.get(name + ".W")), bind(store.get(name + ".b")));
}

Var dense(Binder& bind, const ParamStore& store, const std::string& name, Var x) {
  return numerics::affine_apply(x, bind(store.get(name + ".W")), bind(store.get(name + ".b")));
}

namespace {

template <typename Store>
Var mlp_impl(Binder& bind, Store& store, const std::string& prefix, std::size_t layers, Var x) {
  for (std::size_t i = 0; i < layers; ++i) {
    x = dense(bind, store, prefix + "." + std::to_string(i), x);
    if (i + 1 < layers) x = numerics::relu(x);
  }
  return x;
}

}  // namespace

Var mlp(Binder& bind, ParamStore& store, const std::string& prefix, std::size_t layers, Var x) {
  return mlp_impl(bind, store, prefix, layers, x);
}

Var mlp(Binder& bind, const ParamStore& store, const std::string& prefix, std::size_t layers, Var x) {
  return mlp_impl(bind, store, prefix, layers, x);
}

void require_shape(const ParamStore& store, const std::string& name, const numerics::Shape& shape) {
  if (!store.contains(name)) throw DimensionError("missing parameter '" + name + "'");
  const Tensor& v = store.get(name).value;
  if (v.shape() != shape) {
    throw DimensionError("parameter '" + name + "' has shape " + numerics::shape_string(v.shape()) + ", expected " +
                         numerics::shape_string(shape));
  }
}

}  // namespace skimnet::models
