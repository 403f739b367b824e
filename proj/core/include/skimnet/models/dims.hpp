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
#include <string>

namespace skimnet::models {

enum class Modality { kImageAudio, kImageOnly, kAudioOnly };

std::string modality_name(Modality m);
/// Accepts "image_audio", "image", "audio".
Modality parse_modality(const std::string& name);

/// Network sizes. Input dims mirror the dataset; the rest are model choices.
struct ModelDims {
  std::size_t image_dim = 16;
  std::size_t audio_dim = 12;
  std::size_t clip_frames = 8;
  std::size_t num_classes = 10;

  std::size_t feature_dim = 64;  // D; each encoder emits D/2
  std::size_t encoder_hidden = 384;
  std::size_t encoder_layers = 2;  // hidden layers per encoder
  std::size_t teacher_hidden = 128;
  std::size_t lstm_hidden = 128;
  std::size_t key_dim = 64;
  std::size_t query_hidden = 64;
  bool shared_key = false;

  std::size_t half_dim() const { return feature_dim / 2; }
  std::size_t clip_dim() const { return clip_frames * image_dim; }

  /// Throws ConfigError.
  void validate() const;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// JSON for the architecture-only fields (input dims excluded).
std::string model_dims_to_json(const ModelDims& dims);
/// Strict; input dims are left untouched.
ModelDims model_dims_from_json(const std::string& text, ModelDims base = {});

/// Full JSON including input dims, as stored in checkpoint sidecars.
std::string model_dims_to_sidecar(const ModelDims& dims);
ModelDims model_dims_from_sidecar(const std::string& text);

}  // namespace skimnet::models
