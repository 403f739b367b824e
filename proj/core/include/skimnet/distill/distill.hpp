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
#include <string>
#include <vector>

#include "skimnet/models/student.hpp"
#include "skimnet/models/teacher.hpp"
#include "skimnet/synth/dataset.hpp"

namespace skimnet::distill {

using models::Student;
using models::Teacher;
using numerics::Tensor;
using numerics::Var;

struct DistillConfig {
  double lambda = 100.0;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  double temperature = 1.0;
  /// Background windows drawn per training video and epoch, next to all key windows.
  std::size_t background_per_video = 8;
  models::Modality modality = models::Modality::kImageAudio;
  /// Classifier-head fine-tuning with hard labels on key windows.
  std::size_t finetune_epochs = 1;
  double finetune_learning_rate = 1e-4;
  /// Teacher pre-training on full clip windows before it is frozen.
  std::size_t teacher_epochs = 15;
  double teacher_learning_rate = 1e-3;

  void validate() const;
  friend bool operator==(const DistillConfig&, const DistillConfig&) = default;
};

std::string distill_config_to_json(const DistillConfig& cfg);
DistillConfig distill_config_from_json(const std::string& text);

/// -sum_c teacher_c log(max(student_c, 1e-12)). Inputs must be distributions
/// (nonnegative, summing to 1 within 1e-6), else ValidationError.
double kl_soft_target_loss(const Tensor& teacher_probs, const Tensor& student_probs);

/// sum_i |z_i - fused_i|; for row batches, the mean over rows.
double l1_feature_loss(const Tensor& teacher_z, const Tensor& fused);

struct LossTerms {
  double l1 = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

/// L1 + lambda * L_KL, each term averaged over the batch rows.
LossTerms distill_loss(const Tensor& teacher_z, const Tensor& teacher_probs, const Tensor& fused,
                       const Tensor& student_probs, double lambda);

struct LossVars {
  Var l1, kl, total;
};
/// Differentiable form on student outputs; logits are divided by temperature
/// before the softmax.
LossVars distill_loss(Var fused, Var logits, const Tensor& teacher_z, const Tensor& teacher_probs, double lambda,
                      double temperature = 1.0);

/// Teacher outputs for every time stamp of every video.
struct TeacherCache {
  std::vector<Tensor> z;      // per video [N x D]
  std::vector<Tensor> probs;  // per video [N x C]
};
TeacherCache cache_teacher(const Teacher& teacher, const std::vector<synth::SyntheticVideo>& videos,
                           double temperature = 1.0);

/// Stacks the clip windows of a video as [N x F*D_I].
Tensor clip_windows(const synth::SyntheticVideo& video);

struct TeacherLogRow {
  std::size_t epoch;
  double loss;
  double val_acc;
};

/// Brief supervised training of a fresh teacher: key windows target their
/// label, background windows the uniform distribution.
Teacher train_teacher(const models::ModelDims& dims, const synth::Dataset& data, const DistillConfig& cfg,
                      std::vector<TeacherLogRow>* log = nullptr);

/// Top-1 accuracy of the teacher on key windows.
double teacher_clip_accuracy(const Teacher& teacher, const std::vector<synth::SyntheticVideo>& videos);
/// Top-1 accuracy of the student on key time stamps.
double student_clip_accuracy(const Student& student, const std::vector<synth::SyntheticVideo>& videos);

struct DistillLogRow {
  std::size_t epoch = 0;  // 0 is the untrained student
  double l1 = 0.0;
  double kl = 0.0;
  double total = 0.0;
  double val_acc = 0.0;
};

struct DistillResult {
  Student student;
  std::vector<DistillLogRow> log;
};

/// Adam on the student's encoders, Psi and classifier against the frozen
/// teacher. Deterministic given cfg.seed.
DistillResult train_distill(const synth::Dataset& data, const Teacher& teacher, const models::ModelDims& dims,
                            const DistillConfig& cfg);

/// CSV with header epoch,l1,kl,total,val_acc.
std::string distill_log_csv(const std::vector<DistillLogRow>& log);

}  // namespace skimnet::distill
