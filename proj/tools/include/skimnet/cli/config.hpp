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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skimnet/distill/distill.hpp"
#include "skimnet/evalbench/evalbench.hpp"
#include "skimnet/models/dims.hpp"
#include "skimnet/skim/skim.hpp"
#include "skimnet/synth/dataset.hpp"

namespace skimnet::cli {

enum class SweepAxis { kSubsampleFactor, kTStop };
std::string_view sweep_axis_name(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

struct EvalSection {
  std::vector<evalbench::Strategy> strategies = evalbench::all_strategies();
  skim::InferenceBudget budget;
  /// Seeds for stochastic strategies (random); accuracy is averaged over them.
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::string split = "test";
  SweepAxis sweep_axis = SweepAxis::kTStop;
  /// Empty means 1..T for t_stop and {1, 2, 3, 4, 5, 6, 8} for the factor.
  std::vector<std::size_t> sweep_values;

  friend bool operator==(const EvalSection&, const EvalSection&) = default;
};

/// Reduced architecture on which `gradcheck` compares every gradient entry
/// with central differences. Layer counts and stream layout follow the
/// experiment; widths are shrunk so the check stays cheap.
///
/// Weights are redrawn from N(0, gain^2 / fan_in) and biases from
/// N(0, bias_scale^2). At the training init the attention is nearly uniform
/// and selector gradients sit near 1e-9, far below the ~1e-11 absolute
/// roundoff of the differences; the larger key/query gain sharpens the
/// attention and the smaller LSTM gain keeps its gates off saturation.
struct GradcheckSection {
  std::size_t feature_dim = 8;
  std::size_t encoder_hidden = 6;
  std::size_t teacher_hidden = 6;
  std::size_t lstm_hidden = 6;
  std::size_t key_dim = 4;
  std::size_t query_hidden = 5;
  std::size_t num_classes = 4;
  std::size_t seq_len = 6;
  std::size_t batch = 4;
  std::size_t steps = 3;
  double param_scale = 1.5;
  double lstm_scale = 0.5;
  double attention_scale = 2.5;
  double bias_scale = 0.1;
  double eps = 1e-5;
  double tolerance = 1e-4;

  friend bool operator==(const GradcheckSection&, const GradcheckSection&) = default;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "runs/default";
  synth::DatasetConfig dataset;
  models::ModelDims model;
  distill::DistillConfig distill;
  skim::SkimConfig skim;
  EvalSection eval;
  GradcheckSection gradcheck;

  /// Copies the top-level seed into every section and the dataset input
  /// dims into the model.
  void resolve();
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Strict: the dataset, model, distill, skim and eval sections must all be
/// present (possibly empty); unknown keys anywhere are a ConfigError. The
/// result is resolved and validated.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

}  // namespace skimnet::cli
