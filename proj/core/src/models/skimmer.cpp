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

#include "skimnet/models/skimmer.hpp"

#include <cstdio>

#include "skimnet/error.hpp"

namespace skimnet::models {

namespace {

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void check_skimmer(const ModelDims& d, const ParamStore& p) {
  const std::size_t h = d.lstm_hidden, f = d.feature_dim;
  require_shape(p, "skim.lstm.W", {4 * h, f + h});
  require_shape(p, "skim.lstm.b", {4 * h});
  for (const char* q : {"skim.qi", "skim.qa"}) {
    require_shape(p, std::string(q) + ".0.W", {d.query_hidden, h});
    require_shape(p, std::string(q) + ".0.b", {d.query_hidden});
    require_shape(p, std::string(q) + ".1.W", {d.key_dim, d.query_hidden});
    require_shape(p, std::string(q) + ".1.b", {d.key_dim});
  }
  if (d.shared_key) {
    require_shape(p, "skim.key.W", {d.key_dim, d.half_dim()});
  } else {
    require_shape(p, "skim.ki.W", {d.key_dim, d.half_dim()});
    require_shape(p, "skim.ka.W", {d.key_dim, d.half_dim()});
  }
  require_shape(p, "skim.gate.W", {2, h});
  require_shape(p, "skim.cls.W", {d.num_classes, f});
}

void check_dims(const ModelDims& d, const Student& s) {
  if (!(s.dims() == d)) throw Error(ErrorCategory::kDimensionConflict, "skimmer and student dims differ");
}

}  // namespace

Skimmer::Skimmer(const ModelDims& dims, const Student& student, std::uint64_t seed)
    : dims_(dims), student_(&student), fusion_(student.fusion_fingerprint()) {
  dims_.validate();
  check_dims(dims_, student);
  Rng rng = make_rng(seed, "init.skimmer");
  const std::size_t h = dims.lstm_hidden;
  init_dense(params_, "skim.lstm", 4 * h, dims.feature_dim + h, rng);
  init_dense(params_, "skim.qi.0", dims.query_hidden, h, rng);
  init_dense(params_, "skim.qi.1", dims.key_dim, dims.query_hidden, rng);
  init_dense(params_, "skim.qa.0", dims.query_hidden, h, rng);
  init_dense(params_, "skim.qa.1", dims.key_dim, dims.query_hidden, rng);
  if (dims.shared_key) {
    init_linear(params_, "skim.key", dims.key_dim, dims.half_dim(), rng);
  } else {
    init_linear(params_, "skim.ki", dims.key_dim, dims.half_dim(), rng);
    init_linear(params_, "skim.ka", dims.key_dim, dims.half_dim(), rng);
  }
  init_dense(params_, "skim.gate", 2, h, rng);
  params_.add("skim.cls.W", student.params().get("student.cls.W").value);
  params_.add("skim.cls.b", student.params().get("student.cls.b").value);
}

Skimmer::Skimmer(const ModelDims& dims, const Student& student, ParamStore params, std::uint64_t expected_fusion)
    : dims_(dims), student_(&student), params_(std::move(params)), fusion_(expected_fusion) {
  dims_.validate();
  check_dims(dims_, student);
  check_skimmer(dims_, params_);
  check_fusion();
}

void Skimmer::check_fusion() const {
  const std::uint64_t actual = student_->fusion_fingerprint();
  if (actual != fusion_) {
    throw ValidationError("skimmer fusion network is not the distilled one (fingerprint " + hex(actual) +
                          ", expected " + hex(fusion_) + ")");
  }
}

}  // namespace skimnet::models
