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

/// Clip-level teacher: [clip window | audio] -> hidden -> z^V (D) -> C logits.
class Teacher {
 public:
  Teacher(const ModelDims& dims, std::uint64_t seed);
  /// Adopts existing parameters; throws DimensionError on shape mismatch.
  Teacher(const ModelDims& dims, ParamStore params);

  struct Vars {
    Var z;
    Var logits;
  };
  /// clip: [B x F*D_I], audio: [B x D_A].
  Vars forward(Binder& bind, Var clip, Var audio);
  Vars forward(Binder& bind, Var clip, Var audio) const;

  struct Output {
    Tensor z;      // [B x D] or [D]
    Tensor probs;  // [B x C] or [C]
  };
  /// Tape-free forward; accepts single vectors or row batches.
  Output forward(const Tensor& clip, const Tensor& audio) const;

  const ModelDims& dims() const { return dims_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 private:
  ModelDims dims_;
  ParamStore params_;
};

}  // namespace skimnet::models
