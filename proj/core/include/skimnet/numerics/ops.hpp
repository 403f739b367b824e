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

#include "skimnet/numerics/graph.hpp"
#include "skimnet/numerics/tensor.hpp"

namespace skimnet::numerics {

// Differentiable operations on Graph nodes. Matrix-shaped inputs are batches
// of row vectors. Instrumented kernels charge the active CostMeter.

/// y = x W^T + b for every row of x. x: [r x n] or [n], W: [m x n], b: [m].
Var affine_apply(Var x, Var weight, Var bias);
/// x W^T, no bias.
Var linear_apply(Var x, Var weight);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);

Var relu(Var x);
Var sigmoid(Var x);
Var tanh(Var x);

Var concat_cols(Var a, Var b);
Var slice_cols(Var x, std::size_t begin, std::size_t end);

/// Row-wise max-subtracted softmax.
Var softmax_rows(Var x);

/// Mean over rows of -sum_c targets[c] * log(max(probs[c], floor)). Scalar [1].
Var soft_target_cross_entropy(Var probs, const Tensor& targets, double floor = 1e-12);

/// Mean over rows of sum_i |a_i - b_i|. Scalar [1].
Var l1_rows(Var a, Var b);

/// Scalar [1] holding the sum of all entries.
Var sum_all(Var x);

/// scores[b, j] = scale * <keys[b*n + j], queries[b]>.
/// keys: [(B*n) x d], queries: [B x d] -> [B x n]. Charges B*n*d MACs.
Var attention_scores(Var keys, Var queries, std::size_t n, double scale);

/// out[b] = sum_j weights[b, j] * feats[b*n + j].
/// weights: [B x n], feats: [(B*n) x f] -> [B x f]. Charges B*n*f MACs.
Var soft_index(Var weights, Var feats);

/// out[b] = gates[b, 0] * a[b] + gates[b, 1] * b[b]. gates: [B x 2].
/// Charges 2*B*f MACs.
Var gate_mix(Var gates, Var a, Var b);

// Plain (tape-free) helpers for single vectors.
Tensor affine_apply(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor softmax(const Tensor& x);

}  // namespace skimnet::numerics
