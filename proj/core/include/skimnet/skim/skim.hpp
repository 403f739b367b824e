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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "skimnet/models/layers.hpp"
#include "skimnet/models/skimmer.hpp"
#include "skimnet/models/student.hpp"
#include "skimnet/models/teacher.hpp"
#include "skimnet/numerics/cost.hpp"
#include "skimnet/synth/dataset.hpp"

namespace skimnet::skim {

using models::Binder;
using models::Skimmer;
using models::Student;
using models::Teacher;
using numerics::Graph;
using numerics::Tensor;
using numerics::Var;

// Plain single-vector forms of the selector primitives.

/// softmax(keys q / sqrt(d)); keys: [N x d], query: [d].
Tensor attention_weights(const Tensor& keys, const Tensor& query);
/// sum_j w_j feats_j; w: [N], feats: [N x D_f].
Tensor soft_index(const Tensor& weights, const Tensor& feats);
/// s_image * by_image + s_audio * by_audio.
Tensor gate_mix(double s_image, double s_audio, const Tensor& by_image, const Tensor& by_audio);

/// Number of rows kept when indexing every `factor`-th time stamp of n.
std::size_t kept_count(std::size_t n, std::size_t factor);
/// Rebuilds n_target rows from rows kept at 0, factor, 2 factor, ... by
/// linear interpolation; rows after the last kept one repeat it. Charges two
/// MACs per value of every interpolated row.
Tensor interpolate_features(const Tensor& sparse, std::size_t factor, std::size_t n_target);

/// Per-video indexing features, plus optional recognition features.
struct FeatureSequence {
  Tensor image;        // [N x D/2], empty when the image stream is off
  Tensor audio;        // [N x D/2], empty when the audio stream is off
  Tensor recognition;  // [N x D] or empty
  std::size_t length() const;
};

/// Runs the student encoders on time stamps 0, f, 2f, ... and interpolates
/// back to N rows.
FeatureSequence index_features(const Student& student, const synth::SyntheticVideo& video,
                               std::size_t subsample_factor = 1);
/// Teacher clip descriptors z^V at every time stamp.
Tensor recognition_features(const Teacher& teacher, const synth::SyntheticVideo& video);

struct SkimStep {
  std::vector<double> w_image;  // empty when the stream is off
  std::vector<double> w_audio;
  double s_image = 1.0;
  double s_audio = 0.0;
  std::size_t argmax_image = 0;
  std::size_t argmax_audio = 0;
  /// Argmax of s_image * w_image + s_audio * w_audio; lowest index on ties.
  std::size_t argmax_mixed = 0;
  std::vector<double> z_image;  // indexed features produced by this step
  std::vector<double> z_audio;
};

/// One entry per selection step. Step t holds the weights that produce the
/// indexed features consumed at step t + 1; the first pooled features come
/// from uniform weights and the last step's selection would go unused, so a
/// T-step forward records T - 1 entries.
struct SkimTrace {
  std::vector<SkimStep> steps;
  /// Distinct argmax_mixed indices in first-selected order.
  std::vector<std::size_t> selected() const;
};

/// Graph-level selector.
struct StepVars {
  Var w_image, w_audio, gate, z_image, z_audio;
};
struct SkimGraph {
  Var pooled;  // [B x D]
  Var logits;  // [B x C]
  std::vector<StepVars> steps;
};
using FuseFn = std::function<Var(Var zi, Var za)>;

/// Unrolls `steps` steps for B videos at once. zi, za: [(B*N) x D/2]
/// (invalid for a disabled stream); recognition: [(B*N) x D] or invalid.
/// Skimmer parameters are bound through `bind`; Psi is applied via `fuse`.
SkimGraph skim_graph(Binder& bind, const Skimmer& skimmer, const FuseFn& fuse, Var zi, Var za, Var recognition,
                     std::size_t batch, std::size_t n, std::size_t steps);
SkimGraph skim_graph(Binder& bind, Skimmer& skimmer, const FuseFn& fuse, Var zi, Var za, Var recognition,
                     std::size_t batch, std::size_t n, std::size_t steps);

/// Trace of row b of a skim graph.
SkimTrace extract_trace(const SkimGraph& g, std::size_t b);

struct SkimResult {
  Tensor pooled;  // [D]
  Tensor probs;   // [C]
  SkimTrace trace;
};

/// Tape-free forward on one video's features with the frozen student Psi.
SkimResult skim_forward(const FeatureSequence& features, const Skimmer& skimmer, std::size_t steps);

struct InferenceBudget {
  std::size_t t_stop = 10;
  std::size_t subsample_factor = 1;
  bool use_recognition_features = false;
  void validate() const;
  friend bool operator==(const InferenceBudget&, const InferenceBudget&) = default;
};

struct InferResult {
  Tensor probs;
  SkimTrace trace;
  numerics::CostLedger cost;
  std::optional<std::string> warning;
};

/// Budgeted inference from raw features, with every multiply-accumulate
/// counted. Recognition features need the teacher.
InferResult skim_infer(const synth::SyntheticVideo& video, const Skimmer& skimmer, const InferenceBudget& budget,
                       const Teacher* teacher = nullptr);

struct SkimConfig {
  std::size_t steps = 10;
  double learning_rate = 2e-3;
  std::size_t batch_size = 16;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  double clip_norm = 5.0;
  bool finetune_fusion = false;
  bool finetune_encoders = false;
  bool train_lstm_baseline = true;
  std::size_t lstm_baseline_epochs = 10;
  double lstm_baseline_learning_rate = 2e-3;

  void validate() const;
  friend bool operator==(const SkimConfig&, const SkimConfig&) = default;
};

std::string skim_config_to_json(const SkimConfig& cfg);
SkimConfig skim_config_from_json(const std::string& text);

struct SkimLogRow {
  std::size_t epoch = 0;
  double loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

struct SkimTrainResult {
  Skimmer skimmer;
  std::vector<SkimLogRow> log;
};

/// Cross-entropy on video labels through the unrolled selector. The student
/// is modified only when a fine-tune switch is set.
SkimTrainResult train_skim(const synth::Dataset& data, Student& student, const models::ModelDims& dims,
                           const SkimConfig& cfg);

/// Video-level accuracy of the skimmer at the given budget.
double skim_accuracy(const Skimmer& skimmer, const std::vector<synth::SyntheticVideo>& videos,
                     const InferenceBudget& budget, const Teacher* teacher = nullptr);

/// CSV with header epoch,loss,train_acc,val_acc.
std::string skim_log_csv(const std::vector<SkimLogRow>& log);

/// One JSON object (single line): label, prediction, probs, per-step argmax
/// indices, gates and weight entropies.
std::string trace_to_json(const SkimTrace& trace, std::uint32_t label, const Tensor& probs);

}  // namespace skimnet::skim
