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

#include "skimnet/models/lstm.hpp"

#include <string>

#include "skimnet/error.hpp"
#include "skimnet/numerics/ops.hpp"

namespace skimnet::models {

using namespace numerics;

LstmVars lstm_step(Var x, Var h, Var c, Var weight, Var bias) {
  const std::size_t hidden = h.cols();
  const Shape& ws = weight.shape();
  if (c.shape() != h.shape() || x.rows() != h.rows() || ws.size() != 2 || ws[0] != 4 * hidden ||
      ws[1] != x.cols() + hidden || bias.value().size() != 4 * hidden) {
    throw DimensionError("lstm_step: x " + shape_string(x.shape()) + ", h " + shape_string(h.shape()) + ", c " +
                         shape_string(c.shape()) + ", W " + shape_string(ws) + ", b " +
                         shape_string(bias.shape()) + " do not conform");
  }
  Var gates = affine_apply(concat_cols(x, h), weight, bias);
  Var i = sigmoid(slice_cols(gates, 0, hidden));
  Var f = sigmoid(slice_cols(gates, hidden, 2 * hidden));
  Var g = tanh(slice_cols(gates, 2 * hidden, 3 * hidden));
  Var o = sigmoid(slice_cols(gates, 3 * hidden, 4 * hidden));
  Var c_next = add(mul(f, c), mul(i, g));
  Var h_next = mul(o, tanh(c_next));
  return {h_next, c_next};
}

LstmState lstm_step(const Tensor& x, const Tensor& h, const Tensor& c, const Tensor& weight, const Tensor& bias) {
  Graph g(false);
  LstmVars v = lstm_step(g.constant(x), g.constant(h), g.constant(c), g.constant(weight), g.constant(bias));
  return {v.h.value(), v.c.value()};
}

}  // namespace skimnet::models
