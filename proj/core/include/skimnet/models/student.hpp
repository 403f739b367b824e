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

#include "skimnet/models/dims.hpp"
#include "skimnet/models/layers.hpp"

namespace skimnet::models {

/// Image-audio student: per-stream encoders to D/2, fusion Psi (D -> D -> D)
/// on the concatenation, classifier D -> C. Single-modality variants feed
/// zeros for the disabled half and never run its encoder.
class Student {
 public:
  Student(const ModelDims& dims, Modality modality, std::uint64_t seed);
  Student(const ModelDims& dims, Modality modality, ParamStore params);

  /// x: [B x D_I] -> [B x D/2]
  Var encode_image(Binder& bind, Var x) const;
  Var encode_image(Binder& bind, Var x);
  /// x: [B x D_A] -> [B x D/2]
  Var encode_audio(Binder& bind, Var x) const;
  Var encode_audio(Binder& bind, Var x);
  /// Psi([zi | za]); either input may be invalid for a disabled stream.
  Var fuse(Binder& bind, Var zi, Var za) const;
  Var fuse(Binder& bind, Var zi, Var za);
  Var classify(Binder& bind, Var fused) const;
  Var classify(Binder& bind, Var fused);

  struct Vars {
    Var zi, za, fused, logits;
  };
  Vars forward(Binder& bind, Var image, Var audio);
  Vars forward(Binder& bind, Var image, Var audio) const;

  struct Output {
    Tensor zi, za, fused, probs;
  };
  /// Tape-free forward over single vectors or row batches. Disabled streams
  /// come back as zeros.
  Output forward(const Tensor& image, const Tensor& audio) const;

  bool uses_image() const { return modality_ != Modality::kAudioOnly; }
  bool uses_audio() const { return modality_ != Modality::kImageOnly; }
  Modality modality() const { return modality_; }
  const ModelDims& dims() const { return dims_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  std::uint64_t fusion_fingerprint() const { return params_.fingerprint("student.psi."); }

 private:
  template <typename Self>
  static Vars forward_impl(Self& self, Binder& bind, Var image, Var audio);

  ModelDims dims_;
  Modality modality_;
  ParamStore params_;
};

}  // namespace skimnet::models
