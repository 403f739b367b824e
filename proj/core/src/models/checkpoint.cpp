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

#include "skimnet/models/checkpoint.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "skimnet/error.hpp"

namespace skimnet::models {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_sidecar(const fs::path& path, const json& j) {
  std::ofstream out(sidecar_path(path), std::ios::trunc);
  if (!out) throw IoError("cannot write " + sidecar_path(path).string());
  out << j.dump(2) << '\n';
}

json read_sidecar(const fs::path& path) {
  const fs::path p = sidecar_path(path);
  std::ifstream in(p);
  if (!in) throw Error(ErrorCategory::kMissingFile, "missing checkpoint sidecar " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint sidecar " + p.string() + ": " + e.what());
  }
}

json base_sidecar(const char* kind, const ModelDims& dims) {
  return {{"kind", kind}, {"dims", json::parse(model_dims_to_sidecar(dims))}};
}

ModelDims sidecar_dims(const json& j, const char* kind, const fs::path& path,
                       const std::optional<ModelDims>& expected) {
  if (!j.contains("kind") || j["kind"] != kind || !j.contains("dims")) {
    throw IoError(path.string() + " is not a " + kind + " checkpoint");
  }
  const ModelDims dims = model_dims_from_sidecar(j["dims"].dump());
  if (expected && !(*expected == dims)) {
    throw Error(ErrorCategory::kDimensionConflict,
                path.string() + ": checkpoint architecture " + model_dims_to_sidecar(dims) +
                    " conflicts with configuration " + model_dims_to_sidecar(*expected));
  }
  return dims;
}

template <typename Fn>
auto adopt(const fs::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const DimensionError& e) {
    throw Error(ErrorCategory::kDimensionConflict, path.string() + ": " + e.what());
  }
}

}  // namespace

fs::path sidecar_path(const fs::path& checkpoint) {
  fs::path p = checkpoint;
  p.replace_extension(".json");
  return p;
}

void save_teacher(const Teacher& teacher, const fs::path& path) {
  numerics::save_params(teacher.params(), path);
  write_sidecar(path, base_sidecar("teacher", teacher.dims()));
}

void save_student(const Student& student, const fs::path& path) {
  numerics::save_params(student.params(), path);
  json j = base_sidecar("student", student.dims());
  j["modality"] = modality_name(student.modality());
  write_sidecar(path, j);
}

void save_skimmer(const Skimmer& skimmer, const fs::path& path) {
  numerics::save_params(skimmer.params(), path);
  json j = base_sidecar("skimmer", skimmer.dims());
  j["fusion_fingerprint"] = skimmer.fusion_fingerprint();
  j["trained_steps"] = skimmer.trained_steps();
  write_sidecar(path, j);
}

Teacher load_teacher(const fs::path& path, const std::optional<ModelDims>& expected) {
  const json j = read_sidecar(path);
  const ModelDims dims = sidecar_dims(j, "teacher", path, expected);
  return adopt(path, [&] { return Teacher(dims, numerics::load_params(path)); });
}

Student load_student(const fs::path& path, const std::optional<ModelDims>& expected) {
  const json j = read_sidecar(path);
  const ModelDims dims = sidecar_dims(j, "student", path, expected);
  const Modality m = parse_modality(j.value("modality", std::string("image_audio")));
  return adopt(path, [&] { return Student(dims, m, numerics::load_params(path)); });
}

Skimmer load_skimmer(const fs::path& path, const Student& student) {
  const json j = read_sidecar(path);
  const ModelDims dims = sidecar_dims(j, "skimmer", path, student.dims());
  const std::uint64_t fp = j.value("fusion_fingerprint", std::uint64_t{0});
  Skimmer sk = adopt(path, [&] { return Skimmer(dims, student, numerics::load_params(path), fp); });
  sk.set_trained_steps(j.value("trained_steps", std::size_t{10}));
  return sk;
}

}  // namespace skimnet::models
