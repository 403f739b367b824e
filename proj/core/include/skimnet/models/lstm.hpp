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

#include "skimnet/numerics/graph.hpp"
#include "skimnet/numerics/tensor.hpp"

namespace skimnet::models {

using numerics::Tensor;
using numerics::Var;

struct LstmVars {
  Var h, c;
};

/// One LSTM step on row batches. x: [B x D], h, c: [B x H],
/// W: [4H x (D + H)], b: [4H]; gate blocks are ordered i, f, g, o.
LstmVars lstm_step(Var x, Var h, Var c, Var weight, Var bias);

struct LstmState {
  Tensor h, c;
};
LstmState lstm_step(const Tensor& x, const Tensor& h, const Tensor& c, const Tensor& weight, const Tensor& bias);

}  // namespace skimnet::models
