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

#include "skimnet/models/dims.hpp"

#include <json.hpp>

#include "skimnet/error.hpp"

namespace skimnet::models {

std::string modality_name(Modality m) {
  switch (m) {
    case Modality::kImageAudio: return "image_audio";
    case Modality::kImageOnly: return "image";
    case Modality::kAudioOnly: return "audio";
  }
  return "image_audio";
}

Modality parse_modality(const std::string& name) {
  if (name == "image_audio") return Modality::kImageAudio;
  if (name == "image") return Modality::kImageOnly;
  if (name == "audio") return Modality::kAudioOnly;
  throw ConfigError("unknown modality '" + name + "' (expected image_audio, image or audio)");
}

void ModelDims::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("model: " + m); };
  if (image_dim < 1 || audio_dim < 1 || clip_frames < 1 || num_classes < 1) fail("input dims must be >= 1");
  if (feature_dim < 2 || feature_dim % 2 != 0) fail("feature_dim must be even and >= 2");
  if (encoder_hidden < 1 || teacher_hidden < 1 || lstm_hidden < 1 || key_dim < 1 || query_hidden < 1) {
    fail("layer widths must be >= 1");
  }
}

namespace {

nlohmann::json arch_json(const ModelDims& d) {
  return {{"feature_dim", d.feature_dim},     {"encoder_hidden", d.encoder_hidden},
          {"encoder_layers", d.encoder_layers}, {"teacher_hidden", d.teacher_hidden},
          {"lstm_hidden", d.lstm_hidden},     {"key_dim", d.key_dim},
          {"query_hidden", d.query_hidden},   {"shared_key", d.shared_key}};
}

bool apply_key(ModelDims& d, const std::string& key, const nlohmann::json& v) {
  if (key == "feature_dim") d.feature_dim = v.get<std::size_t>();
  else if (key == "encoder_hidden") d.encoder_hidden = v.get<std::size_t>();
  else if (key == "encoder_layers") d.encoder_layers = v.get<std::size_t>();
  else if (key == "teacher_hidden") d.teacher_hidden = v.get<std::size_t>();
  else if (key == "lstm_hidden") d.lstm_hidden = v.get<std::size_t>();
  else if (key == "key_dim") d.key_dim = v.get<std::size_t>();
  else if (key == "query_hidden") d.query_hidden = v.get<std::size_t>();
  else if (key == "shared_key") d.shared_key = v.get<bool>();
  else return false;
  return true;
}

nlohmann::json parse_object(const std::string& text, const char* what) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(what) + ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected an object");
  return j;
}

}  // namespace

std::string model_dims_to_json(const ModelDims& dims) { return arch_json(dims).dump(); }

ModelDims model_dims_from_json(const std::string& text, ModelDims base) {
  const nlohmann::json j = parse_object(text, "model");
  try {
    for (const auto& [key, value] : j.items()) {
      if (!apply_key(base, key, value)) throw ConfigError("model: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model: wrong value type: ") + e.what());
  }
  return base;
}

std::string model_dims_to_sidecar(const ModelDims& dims) {
  nlohmann::json j = arch_json(dims);
  j["image_dim"] = dims.image_dim;
  j["audio_dim"] = dims.audio_dim;
  j["clip_frames"] = dims.clip_frames;
  j["num_classes"] = dims.num_classes;
  return j.dump();
}

ModelDims model_dims_from_sidecar(const std::string& text) {
  const nlohmann::json j = parse_object(text, "checkpoint sidecar");
  ModelDims d;
  try {
    for (const auto& [key, value] : j.items()) {
      if (apply_key(d, key, value)) continue;
      if (key == "image_dim") d.image_dim = value.get<std::size_t>();
      else if (key == "audio_dim") d.audio_dim = value.get<std::size_t>();
      else if (key == "clip_frames") d.clip_frames = value.get<std::size_t>();
      else if (key == "num_classes") d.num_classes = value.get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint sidecar: wrong value type: ") + e.what());
  }
  return d;
}

}  // namespace skimnet::models
