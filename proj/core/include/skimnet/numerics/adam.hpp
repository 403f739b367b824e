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
#include <vector>

#include "skimnet/numerics/param_store.hpp"

namespace skimnet::numerics {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global gradient-norm clip; 0 disables.
  double clip_norm = 0.0;
};

/// Adam with bias-corrected moments over a fixed set of parameters.
class Adam {
 public:
  Adam(std::vector<Param*> params, AdamConfig config);

  void zero_grad();
  /// Applies one update from the current gradients. Returns the pre-clip
  /// global gradient norm.
  double step();

  std::size_t steps_taken() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  std::vector<Param*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  AdamConfig config_;
  std::size_t t_ = 0;
};

}  // namespace skimnet::numerics
