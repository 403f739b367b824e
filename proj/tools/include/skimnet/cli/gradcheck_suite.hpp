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

#include <string>
#include <vector>

#include "skimnet/cli/config.hpp"
#include "skimnet/numerics/gradcheck.hpp"

namespace skimnet::cli {

struct ModuleCheck {
  std::string module;
  numerics::GradCheckReport report;
};

/// Architecture used by the gradient checks: the experiment's layout with
/// the widths of the gradcheck section.
models::ModelDims probe_dims(const ExperimentConfig& cfg);

/// Central-difference checks of every differentiable module: teacher,
/// distillation loss through the student, the unrolled skimmer (LSTM,
/// queries, keys, gate), the skimmer with a trainable student, and the LSTM
/// baseline.
std::vector<ModuleCheck> run_gradchecks(const ExperimentConfig& cfg);

/// Only the named modules.
ModuleCheck run_gradcheck(const ExperimentConfig& cfg, const std::string& module);
const std::vector<std::string>& gradcheck_modules();

std::string gradcheck_report_json(const std::vector<ModuleCheck>& checks);

}  // namespace skimnet::cli
