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
#include <filesystem>
#include <string>
#include <vector>

#include "skimnet/numerics/tensor.hpp"

namespace skimnet::synth {

using numerics::Tensor;

struct DatasetConfig {
  std::size_t num_classes = 10;
  /// Total videos per class across all splits.
  std::size_t videos_per_class = 60;
  double train_fraction = 0.5;
  double val_fraction = 0.15;
  std::size_t seq_len = 64;      // N
  std::size_t clip_frames = 8;   // F
  std::size_t image_dim = 16;    // D_I
  std::size_t audio_dim = 12;    // D_A
  std::size_t key_len = 16;      // L
  double bg_noise = 0.3;
  double visual_snr = 0.75;
  double audio_snr = 0.9;
  double motion_scale = 1.0;
  /// Lag-one correlation of the per-stamp feature noise along time (AR(1)).
  double temporal_correlation = 0.0;
  bool audio_precursor = true;
  std::uint64_t seed = 0;

  /// Throws ConfigError on invalid settings (e.g. key_len > seq_len).
  void validate() const;
  std::size_t train_per_class() const;
  std::size_t val_per_class() const;
  std::size_t test_per_class() const;

  friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

/// Number of audio time stamps before the planted segment that carry the
/// class audio signal when audio_precursor is enabled.
inline constexpr std::size_t kPrecursorLen = 2;

struct SyntheticVideo {
  std::uint32_t label = 0;
  Tensor image_feats;  // [N x D_I]
  Tensor audio_feats;  // [N x D_A]
  Tensor frame_feats;  // [N x F x D_I]; frame 0 equals image_feats row
  std::vector<std::uint8_t> key_mask;  // N entries, exactly L set

  std::size_t seq_len() const { return key_mask.size(); }
  std::size_t key_start() const;
  /// The clip window at time stamp j as a flat [F * D_I] vector.
  Tensor clip_window(std::size_t j) const;

  friend bool operator==(const SyntheticVideo&, const SyntheticVideo&) = default;
};

struct Dataset {
  DatasetConfig config;
  std::vector<SyntheticVideo> train;
  std::vector<SyntheticVideo> val;
  std::vector<SyntheticVideo> test;
};

/// Seeded class structure shared by every video of a dataset.
struct Prototypes {
  Tensor image;              // [C x D_I] unit rows
  Tensor audio;              // [C x D_A] unit rows, derived from motion
  Tensor motion;             // [C x D_I] unit rows
  Tensor distracter_image;   // [4C x D_I]
  Tensor distracter_audio;   // [4C x D_A]
  Tensor distracter_motion;  // [4C x D_I]
};

Prototypes make_prototypes(const DatasetConfig& cfg);

/// Generates one video. Randomness derives from (cfg.seed, index) only, so
/// videos can be produced in any order or in parallel.
SyntheticVideo generate_video(const DatasetConfig& cfg, const Prototypes& protos, std::uint32_t label,
                              std::uint64_t index);

Dataset gen_dataset(const DatasetConfig& cfg);

std::string dataset_config_to_json(const DatasetConfig& cfg);
/// Strict: unknown keys are a ConfigError; absent keys keep defaults.
DatasetConfig dataset_config_from_json(const std::string& text);

// "SKND" container: magic, u32 version, u64 config-JSON length + bytes,
// u64 video count, then per video u32 label, u64 N, u64 D_I, u64 D_A, u64 F,
// ceil(N/8) key-mask bytes (LSB first), little-endian f64 image, audio and
// frame features.
inline constexpr std::uint32_t kDatasetVersion = 1;

struct DatasetSplit {
  std::string config_json;
  std::vector<SyntheticVideo> videos;
};

void save_split(const std::filesystem::path& path, const DatasetConfig& cfg,
                const std::vector<SyntheticVideo>& videos);
DatasetSplit load_split(const std::filesystem::path& path);

}  // namespace skimnet::synth
