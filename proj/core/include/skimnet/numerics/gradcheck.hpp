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
#include <functional>
#include <string>
#include <vector>

#include "skimnet/numerics/graph.hpp"
#include "skimnet/numerics/param_store.hpp"

namespace skimnet::numerics {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries_checked = 0;
  double tolerance = 0.0;
  bool passed = true;
};

/// Builds a scalar loss on the given graph from parameters in the checked
/// store. Called once with a recording graph and twice per entry without.
using LossBuilder = std::function<Var(Graph&)>;

/// Compares backpropagated gradients with central differences
/// (f(theta + eps) - f(theta - eps)) / (2 eps) for every entry of every
/// parameter in `params` (or only those named in `only`, when non-empty).
/// Relative error is |a - g| / max(|a|, |g|, 1e-8).
GradCheckReport finite_diff_check(const LossBuilder& loss, ParamStore& params, double eps, double tol,
                                  const std::vector<std::string>& only = {});

}  // namespace skimnet::numerics
