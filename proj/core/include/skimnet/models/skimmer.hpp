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
#include <string>

#include "skimnet/models/dims.hpp"
#include "skimnet/models/layers.hpp"
#include "skimnet/models/student.hpp"

namespace skimnet::models {

/// Trainable parts of the recurrent selector. The fusion network is not owned:
/// it is the student's Psi, bound by reference and identified by fingerprint.
///
/// Layout: skim.lstm [4H x (D + H)], skim.qi.{0,1} and skim.qa.{0,1}
/// (H -> query_hidden -> d), skim.ki and skim.ka (D/2 -> d) or a single
/// skim.key when keys are shared, skim.gate (H -> 2), skim.cls (D -> C).
class Skimmer {
 public:
  /// Fresh parameters; the video classifier starts as a copy of the
  /// student's classifier.
  Skimmer(const ModelDims& dims, const Student& student, std::uint64_t seed);
  /// Adopts parameters. expected_fusion is the Psi fingerprint recorded when
  /// they were trained; a different student Psi is a ValidationError.
  Skimmer(const ModelDims& dims, const Student& student, ParamStore params, std::uint64_t expected_fusion);

  const Student& student() const { return *student_; }
  const ModelDims& dims() const { return dims_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  bool uses_audio() const { return student_->uses_audio(); }
  bool uses_image() const { return student_->uses_image(); }
  std::string image_key() const { return dims_.shared_key ? "skim.key" : "skim.ki"; }
  std::string audio_key() const { return dims_.shared_key ? "skim.key" : "skim.ka"; }

  /// Fingerprint of the student Psi this skimmer is bound to.
  std::uint64_t fusion_fingerprint() const { return fusion_; }
  /// Re-reads the student's Psi fingerprint (after fine-tuning it).
  void rebind_fusion() { fusion_ = student_->fusion_fingerprint(); }
  /// Throws ValidationError when the bound Psi changed since construction.
  void check_fusion() const;

  /// Unrolled step count used in training; inference beyond it extrapolates.
  std::size_t trained_steps() const { return trained_steps_; }
  void set_trained_steps(std::size_t t) { trained_steps_ = t; }

 private:
  ModelDims dims_;
  const Student* student_;
  ParamStore params_;
  std::uint64_t fusion_;
  std::size_t trained_steps_ = 10;
};

}  // namespace skimnet::models
