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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skimnet/models/skimmer.hpp"
#include "skimnet/models/student.hpp"
#include "skimnet/models/teacher.hpp"
#include "skimnet/numerics/cost.hpp"
#include "skimnet/skim/skim.hpp"
#include "skimnet/synth/dataset.hpp"

namespace skimnet::evalbench {

using numerics::CostLedger;
using numerics::Tensor;

enum class Strategy { kRandom, kUniform, kFront, kCenter, kEnd, kDense, kScSampler, kLstm, kNonRecurrent, kOurs };

std::string_view strategy_name(Strategy s);
/// Throws ConfigError listing the valid names.
Strategy parse_strategy(std::string_view name);
const std::vector<Strategy>& all_strategies();
/// Whether the strategy picks time stamps (and so has a selection recall).
bool has_selection(Strategy s);

/// Time stamps a selection strategy looks at.
inline constexpr std::size_t kSelectCount = 10;

/// Recurrent baseline that reads Psi(z_j) for all N time stamps in order and
/// classifies the last hidden state. Parameters: lstmb.lstm [4H x (D + H)],
/// lstmb.head (H -> C).
class LstmBaseline {
 public:
  LstmBaseline(const models::ModelDims& dims, std::uint64_t seed);
  LstmBaseline(const models::ModelDims& dims, numerics::ParamStore params);

  /// inputs[j]: Psi(z_j) for time stamp j, [B x D]; returns logits [B x C].
  numerics::Var forward(models::Binder& bind, const std::vector<numerics::Var>& inputs);
  numerics::Var forward(models::Binder& bind, const std::vector<numerics::Var>& inputs) const;

  const models::ModelDims& dims() const { return dims_; }
  numerics::ParamStore& params() { return params_; }
  const numerics::ParamStore& params() const { return params_; }

 private:
  models::ModelDims dims_;
  numerics::ParamStore params_;
};

struct LstmBaselineConfig {
  std::size_t epochs = 10;
  double learning_rate = 2e-3;
  std::size_t batch_size = 16;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
};

/// Trains on Psi(z_j) sequences of the training videos with a frozen student.
LstmBaseline train_lstm_baseline(const synth::Dataset& data, const models::Student& student,
                                 const LstmBaselineConfig& cfg);

void save_lstm_baseline(const LstmBaseline& model, const std::filesystem::path& path);
LstmBaseline load_lstm_baseline(const std::filesystem::path& path, const models::ModelDims& expected);

/// Trained models a strategy may need. Only the student is always required.
struct ModelSet {
  const models::Student* student = nullptr;
  const models::Skimmer* skimmer = nullptr;
  const LstmBaseline* lstm = nullptr;
  const models::Teacher* teacher = nullptr;
};

struct StrategyOutput {
  Tensor probs;                       // [C]
  std::vector<std::size_t> selected;  // empty for dense and lstm
  CostLedger cost;
  std::optional<std::string> warning;
  std::optional<skim::SkimTrace> trace;  // ours only
};

/// Runs one strategy on one video with every MAC counted. `seed` and
/// `video_index` drive the random strategy only.
StrategyOutput run_strategy(Strategy strategy, const synth::SyntheticVideo& video, const ModelSet& models,
                            const skim::InferenceBudget& budget, std::uint64_t seed = 0,
                            std::uint64_t video_index = 0);

/// Indices of the k largest values, largest first, lowest index on ties.
std::vector<std::size_t> top_k(const std::vector<double>& values, std::size_t k);
/// round(j (N - 1) / (K - 1)) for j = 0..K-1, with K = min(count, N).
std::vector<std::size_t> uniform_indices(std::size_t n, std::size_t count);

/// |selected ∩ key| / min(|selected|, L). Duplicates count once.
double selection_recall(const std::vector<std::size_t>& selected, const std::vector<std::uint8_t>& key_mask);

// Cost model.

/// MACs of one component: "dense" {m, n}, "lstm_step" {H, D},
/// "attention" {N, d}, "soft_index" {N, D_f}, "gate_mix" {D_f},
/// "interpolation" {rows, D_f}. Unknown names throw ValidationError.
std::uint64_t flop_count(std::string_view component, const std::vector<std::size_t>& dims);

/// Closed-form per-video ledger of a strategy (MACs and bias additions).
CostLedger analytic_cost(Strategy strategy, const models::ModelDims& dims, models::Modality modality,
                         std::size_t n, const skim::InferenceBudget& budget);

struct EvalOptions {
  skim::InferenceBudget budget;
  std::vector<std::uint64_t> seeds{0};
};

struct EvalReport {
  std::string strategy;
  double accuracy = 0.0;  // mean over seeds
  double accuracy_std = 0.0;
  std::vector<double> seed_accuracy;
  std::vector<double> per_class_accuracy;  // first seed
  std::optional<double> recall;            // mean over videos and seeds
  CostLedger cost;                         // per video
  std::uint64_t videos = 0;
  std::vector<std::uint64_t> seeds;
  skim::InferenceBudget budget;
  std::vector<std::string> warnings;
};

/// Evaluates a strategy over a split. Empty splits are an evaluation error.
EvalReport evaluate(Strategy strategy, const std::vector<synth::SyntheticVideo>& videos, const ModelSet& models,
                    const EvalOptions& options);

std::string report_to_json(const EvalReport& report, const std::optional<CostLedger>& reference = {});
/// strategy,accuracy,accuracy_std,recall,macs,bias_adds,ratio_vs_dense
std::string reports_to_csv(const std::vector<EvalReport>& reports);
/// Aligned plain-text table for terminals.
std::string comparison_table(const std::vector<EvalReport>& reports);

}  // namespace skimnet::evalbench
