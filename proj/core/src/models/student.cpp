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

#include "skimnet/models/student.hpp"

#include <string>

#include "skimnet/error.hpp"
#include "skimnet/numerics/cost.hpp"

namespace skimnet::models {

namespace {

using numerics::Component;
using numerics::CostScope;

void check_student(const ModelDims& d, const ParamStore& p) {
  auto encoder = [&](const std::string& prefix, std::size_t in) {
    std::size_t width = in;
    for (std::size_t i = 0; i <= d.encoder_layers; ++i) {
      const std::size_t out = i == d.encoder_layers ? d.half_dim() : d.encoder_hidden;
      require_shape(p, prefix + "." + std::to_string(i) + ".W", {out, width});
      require_shape(p, prefix + "." + std::to_string(i) + ".b", {out});
      width = out;
    }
  };
  encoder("student.img", d.image_dim);
  encoder("student.aud", d.audio_dim);
  for (int i = 0; i < 2; ++i) {
    require_shape(p, "student.psi." + std::to_string(i) + ".W", {d.feature_dim, d.feature_dim});
    require_shape(p, "student.psi." + std::to_string(i) + ".b", {d.feature_dim});
  }
  require_shape(p, "student.cls.W", {d.num_classes, d.feature_dim});
  require_shape(p, "student.cls.b", {d.num_classes});
}

void require_cols(const char* what, const Var& x, std::size_t cols) {
  if (x.cols() != cols) {
    throw DimensionError(std::string("student_forward: ") + what + " input " + numerics::shape_string(x.shape()) +
                         " expected " + std::to_string(cols) + " columns");
  }
}

template <typename Store>
Var encode(const ModelDims& d, Binder& bind, Store& p, const char* stream, Var x, std::size_t in) {
  require_cols(stream, x, in);
  CostScope scope(Component::kEncoders);
  return mlp(bind, p, std::string("student.") + stream, d.encoder_layers + 1, x);
}

template <typename Store>
Var fuse_impl(const ModelDims& d, Binder& bind, Store& p, Var zi, Var za) {
  if (!zi.valid() && !za.valid()) throw ValidationError("fuse: both streams disabled");
  Graph& g = zi.valid() ? zi.graph() : za.graph();
  const std::size_t rows = zi.valid() ? zi.rows() : za.rows();
  const numerics::Shape shape = rows == 1 && (zi.valid() ? zi : za).value().rank() == 1
                                    ? numerics::Shape{d.half_dim()}
                                    : numerics::Shape{rows, d.half_dim()};
  if (!zi.valid()) zi = g.constant(Tensor(shape));
  if (!za.valid()) za = g.constant(Tensor(shape));
  CostScope scope(Component::kFusion);
  return mlp(bind, p, "student.psi", 2, numerics::concat_cols(zi, za));
}

template <typename Store>
Var classify_impl(Binder& bind, Store& p, Var fused) {
  CostScope scope(Component::kClassifier);
  return dense(bind, p, "student.cls", fused);
}

}  // namespace

Student::Student(const ModelDims& dims, Modality modality, std::uint64_t seed)
    : dims_(dims), modality_(modality) {
  dims_.validate();
  Rng rng = make_rng(seed, "init.student");
  auto encoder = [&](const std::string& prefix, std::size_t in) {
    std::size_t width = in;
    for (std::size_t i = 0; i <= dims.encoder_layers; ++i) {
      const std::size_t out = i == dims.encoder_layers ? dims.half_dim() : dims.encoder_hidden;
      init_dense(params_, prefix + "." + std::to_string(i), out, width, rng);
      width = out;
    }
  };
  encoder("student.img", dims.image_dim);
  encoder("student.aud", dims.audio_dim);
  init_dense(params_, "student.psi.0", dims.feature_dim, dims.feature_dim, rng);
  init_dense(params_, "student.psi.1", dims.feature_dim, dims.feature_dim, rng);
  init_dense(params_, "student.cls", dims.num_classes, dims.feature_dim, rng);
}

Student::Student(const ModelDims& dims, Modality modality, ParamStore params)
    : dims_(dims), modality_(modality), params_(std::move(params)) {
  dims_.validate();
  check_student(dims_, params_);
}

Var Student::encode_image(Binder& bind, Var x) const { return encode(dims_, bind, params_, "img", x, dims_.image_dim); }
Var Student::encode_image(Binder& bind, Var x) { return encode(dims_, bind, params_, "img", x, dims_.image_dim); }
Var Student::encode_audio(Binder& bind, Var x) const { return encode(dims_, bind, params_, "aud", x, dims_.audio_dim); }
Var Student::encode_audio(Binder& bind, Var x) { return encode(dims_, bind, params_, "aud", x, dims_.audio_dim); }
Var Student::fuse(Binder& bind, Var zi, Var za) const { return fuse_impl(dims_, bind, params_, zi, za); }
Var Student::fuse(Binder& bind, Var zi, Var za) { return fuse_impl(dims_, bind, params_, zi, za); }
Var Student::classify(Binder& bind, Var fused) const { return classify_impl(bind, params_, fused); }
Var Student::classify(Binder& bind, Var fused) { return classify_impl(bind, params_, fused); }

template <typename Self>
Student::Vars Student::forward_impl(Self& self, Binder& bind, Var image, Var audio) {
  if (image.rows() != audio.rows()) {
    throw DimensionError("student_forward: image and audio batch sizes differ");
  }
  Vars v;
  if (self.uses_image()) v.zi = self.encode_image(bind, image);
  if (self.uses_audio()) v.za = self.encode_audio(bind, audio);
  v.fused = self.fuse(bind, v.zi, v.za);
  v.logits = self.classify(bind, v.fused);
  return v;
}

Student::Vars Student::forward(Binder& bind, Var image, Var audio) { return forward_impl(*this, bind, image, audio); }
Student::Vars Student::forward(Binder& bind, Var image, Var audio) const {
  return forward_impl(*this, bind, image, audio);
}

Student::Output Student::forward(const Tensor& image, const Tensor& audio) const {
  Graph g(false);
  Binder bind(g, false);
  Vars v = forward(bind, g.constant(image), g.constant(audio));
  Output out;
  const numerics::Shape half = image.rank() == 1 ? numerics::Shape{dims_.half_dim()}
                                                 : numerics::Shape{image.rows(), dims_.half_dim()};
  out.zi = v.zi.valid() ? v.zi.value() : Tensor(half);
  out.za = v.za.valid() ? v.za.value() : Tensor(half);
  out.fused = v.fused.value();
  out.probs = numerics::softmax_rows(v.logits).value();
  return out;
}

}  // namespace skimnet::models
