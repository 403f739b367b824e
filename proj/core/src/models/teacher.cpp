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

#include "skimnet/models/teacher.hpp"

#include <string>

#include "skimnet/error.hpp"
#include "skimnet/numerics/cost.hpp"

namespace skimnet::models {

namespace {

void check_teacher(const ModelDims& d, const ParamStore& p) {
  require_shape(p, "teacher.0.W", {d.teacher_hidden, d.clip_dim() + d.audio_dim});
  require_shape(p, "teacher.0.b", {d.teacher_hidden});
  require_shape(p, "teacher.1.W", {d.feature_dim, d.teacher_hidden});
  require_shape(p, "teacher.1.b", {d.feature_dim});
  require_shape(p, "teacher.head.W", {d.num_classes, d.feature_dim});
  require_shape(p, "teacher.head.b", {d.num_classes});
}

template <typename Store>
Teacher::Vars teacher_vars(const ModelDims& d, Binder& bind, Store& params, Var clip, Var audio) {
  if (clip.cols() != d.clip_dim() || audio.cols() != d.audio_dim || clip.rows() != audio.rows()) {
    throw DimensionError("teacher_forward: clip " + numerics::shape_string(clip.shape()) + " / audio " +
                         numerics::shape_string(audio.shape()) + " do not match F*D_I = " +
                         std::to_string(d.clip_dim()) + ", D_A = " + std::to_string(d.audio_dim));
  }
  numerics::CostScope scope(numerics::Component::kTeacher);
  Var z = mlp(bind, params, "teacher", 2, numerics::concat_cols(clip, audio));
  Var logits = dense(bind, params, "teacher.head", z);
  return {z, logits};
}

}  // namespace

Teacher::Teacher(const ModelDims& dims, std::uint64_t seed) : dims_(dims) {
  dims_.validate();
  Rng rng = make_rng(seed, "init.teacher");
  init_dense(params_, "teacher.0", dims.teacher_hidden, dims.clip_dim() + dims.audio_dim, rng);
  init_dense(params_, "teacher.1", dims.feature_dim, dims.teacher_hidden, rng);
  init_dense(params_, "teacher.head", dims.num_classes, dims.feature_dim, rng);
}

Teacher::Teacher(const ModelDims& dims, ParamStore params) : dims_(dims), params_(std::move(params)) {
  dims_.validate();
  check_teacher(dims_, params_);
}

Teacher::Vars Teacher::forward(Binder& bind, Var clip, Var audio) {
  return teacher_vars(dims_, bind, params_, clip, audio);
}

Teacher::Vars Teacher::forward(Binder& bind, Var clip, Var audio) const {
  return teacher_vars(dims_, bind, params_, clip, audio);
}

Teacher::Output Teacher::forward(const Tensor& clip, const Tensor& audio) const {
  Graph g(false);
  Binder bind(g, false);
  Vars v = forward(bind, g.constant(clip), g.constant(audio));
  Var probs = numerics::softmax_rows(v.logits);
  return {v.z.value(), probs.value()};
}

}  // namespace skimnet::models
