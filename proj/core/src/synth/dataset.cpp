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

#include "skimnet/synth/dataset.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>

#include "skimnet/binary_io.hpp"
#include "skimnet/error.hpp"
#include "skimnet/parallel.hpp"
#include "skimnet/rng.hpp"

namespace skimnet::synth {

namespace {

using numerics::Shape;

void unit_rows(Tensor& t, Rng& rng) {
  std::normal_distribution<double> normal;
  const std::size_t c = t.cols();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    double* row = t.data() + r * c;
    double norm = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      row[k] = normal(rng);
      norm += row[k] * row[k];
    }
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < c; ++k) row[k] /= norm;
  }
}

/// [n x dim] unit-variance Gaussian noise, AR(1) along time with coefficient rho.
Tensor ar_noise(std::size_t n, std::size_t dim, double rho, Rng& rng) {
  std::normal_distribution<double> normal;
  Tensor e({n, dim});
  const double fresh = std::sqrt(1.0 - rho * rho);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < dim; ++k) {
      const double z = normal(rng);
      e.at(j, k) = j == 0 ? z : rho * e.at(j - 1, k) + fresh * z;
    }
  }
  return e;
}

/// Per-dimension noise std that gives a noise vector of norm ~1/snr.
double snr_sigma(double snr, std::size_t dim) {
  if (std::isinf(snr)) return 0.0;
  if (snr == 0.0) return 1.0 / std::sqrt(static_cast<double>(dim));
  return 1.0 / (snr * std::sqrt(static_cast<double>(dim)));
}

/// dst = proto + sigma * noise; a null proto contributes nothing.
void noisy_copy(double* dst, const double* proto, const double* noise, std::size_t dim, double sigma) {
  for (std::size_t k = 0; k < dim; ++k) dst[k] = (proto ? proto[k] : 0.0) + (sigma > 0.0 ? sigma * noise[k] : 0.0);
}

/// Class signal at the given SNR; SNR 0 drops the prototype entirely.
void signal_copy(double* dst, const double* proto, const double* noise, std::size_t dim, double snr) {
  noisy_copy(dst, snr == 0.0 ? nullptr : proto, noise, dim, snr_sigma(snr, dim));
}

}  // namespace

void DatasetConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("dataset: " + m); };
  if (num_classes < 1) fail("num_classes must be >= 1");
  if (videos_per_class < 1) fail("videos_per_class must be >= 1");
  if (seq_len < 1) fail("seq_len must be >= 1");
  if (clip_frames < 1) fail("clip_frames must be >= 1");
  if (image_dim < 1 || audio_dim < 1) fail("feature dimensions must be >= 1");
  if (key_len < 1) fail("key_len must be >= 1");
  if (key_len > seq_len) {
    fail("key_len (" + std::to_string(key_len) + ") exceeds seq_len (" + std::to_string(seq_len) + ")");
  }
  if (!(visual_snr >= 0.0) || !(audio_snr >= 0.0)) fail("SNRs must be >= 0");
  if (image_dim > 4096 || audio_dim > 4096) fail("feature dimensions above 4096 are not supported");
  if (bg_noise < 0.0 || motion_scale < 0.0) fail("noise and motion scales must be >= 0");
  if (!(temporal_correlation >= 0.0 && temporal_correlation < 1.0)) fail("temporal_correlation must be in [0, 1)");
  if (train_fraction < 0.0 || val_fraction < 0.0 || train_fraction + val_fraction > 1.0) {
    fail("split fractions must be non-negative and sum to at most 1");
  }
}

std::size_t DatasetConfig::train_per_class() const {
  return static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(videos_per_class)));
}

std::size_t DatasetConfig::val_per_class() const {
  const std::size_t v =
      static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(videos_per_class)));
  return std::min(v, videos_per_class - std::min(videos_per_class, train_per_class()));
}

std::size_t DatasetConfig::test_per_class() const {
  return videos_per_class - std::min(videos_per_class, train_per_class() + val_per_class());
}

std::size_t SyntheticVideo::key_start() const {
  for (std::size_t j = 0; j < key_mask.size(); ++j) {
    if (key_mask[j]) return j;
  }
  throw ValidationError("video has no key time stamps");
}

Tensor SyntheticVideo::clip_window(std::size_t j) const {
  const std::size_t f = frame_feats.shape()[1], d = frame_feats.shape()[2];
  std::vector<double> out(frame_feats.data() + j * f * d, frame_feats.data() + (j + 1) * f * d);
  return Tensor({f * d}, std::move(out));
}

Prototypes make_prototypes(const DatasetConfig& cfg) {
  Rng rng = make_rng(cfg.seed, "prototypes");
  const std::size_t c = cfg.num_classes, di = cfg.image_dim, da = cfg.audio_dim;
  Prototypes p{Tensor({c, di}), Tensor({c, da}), Tensor({c, di}),
               Tensor({4 * c, di}), Tensor({4 * c, da}), Tensor({4 * c, di})};
  unit_rows(p.image, rng);
  unit_rows(p.motion, rng);
  unit_rows(p.distracter_image, rng);
  unit_rows(p.distracter_audio, rng);
  unit_rows(p.distracter_motion, rng);

  // Audio prototypes summarize the motion pattern through a fixed random map.
  Tensor mixing({da, di});
  std::normal_distribution<double> normal;
  for (double& v : mixing.values()) v = normal(rng);
  for (std::size_t k = 0; k < c; ++k) {
    double norm = 0.0;
    for (std::size_t a = 0; a < da; ++a) {
      double s = 0.0;
      for (std::size_t i = 0; i < di; ++i) s += mixing.at(a, i) * p.motion.at(k, i);
      p.audio.at(k, a) = s;
      norm += s * s;
    }
    norm = std::sqrt(norm);
    for (std::size_t a = 0; a < da; ++a) p.audio.at(k, a) /= norm;
  }
  return p;
}

SyntheticVideo generate_video(const DatasetConfig& cfg, const Prototypes& protos, std::uint32_t label,
                              std::uint64_t index) {
  Rng rng = make_rng(cfg.seed, "video", index);
  const std::size_t n = cfg.seq_len, f = cfg.clip_frames, di = cfg.image_dim, da = cfg.audio_dim;
  const std::size_t pool = protos.distracter_image.rows();

  SyntheticVideo v;
  v.label = label;
  v.image_feats = Tensor({n, di});
  v.audio_feats = Tensor({n, da});
  v.frame_feats = Tensor({n, f, di});
  v.key_mask.assign(n, 0);

  std::uniform_int_distribution<std::size_t> start_dist(0, n - cfg.key_len);
  const std::size_t start = start_dist(rng);
  for (std::size_t j = start; j < start + cfg.key_len; ++j) v.key_mask[j] = 1;

  std::uniform_int_distribution<std::size_t> pool_dist(0, pool - 1);
  std::normal_distribution<double> normal;
  const double vis_sigma = snr_sigma(cfg.visual_snr, di);
  const double bg_img_sigma = cfg.bg_noise / std::sqrt(static_cast<double>(di));
  const double bg_aud_sigma = cfg.bg_noise / std::sqrt(static_cast<double>(da));
  const Tensor img_noise = ar_noise(n, di, cfg.temporal_correlation, rng);
  const Tensor aud_noise = ar_noise(n, da, cfg.temporal_correlation, rng);

  for (std::size_t j = 0; j < n; ++j) {
    double* img = v.image_feats.data() + j * di;
    double* aud = v.audio_feats.data() + j * da;
    const double* img_e = img_noise.data() + j * di;
    const double* aud_e = aud_noise.data() + j * da;
    const bool key = v.key_mask[j] != 0;
    const bool precursor = cfg.audio_precursor && !key && j < start && start - j <= kPrecursorLen;

    const double* motion = nullptr;
    double frame_sigma = 0.0;
    if (key) {
      signal_copy(img, protos.image.data() + label * di, img_e, di, cfg.visual_snr);
      signal_copy(aud, protos.audio.data() + label * da, aud_e, da, cfg.audio_snr);
      motion = protos.motion.data() + label * di;
      frame_sigma = vis_sigma;
    } else {
      const std::size_t k_img = pool_dist(rng);
      const std::size_t k_mot = pool_dist(rng);
      noisy_copy(img, protos.distracter_image.data() + k_img * di, img_e, di, bg_img_sigma);
      motion = protos.distracter_motion.data() + k_mot * di;
      frame_sigma = bg_img_sigma;
      if (precursor) {
        signal_copy(aud, protos.audio.data() + label * da, aud_e, da, cfg.audio_snr);
      } else {
        const std::size_t k_aud = pool_dist(rng);
        noisy_copy(aud, protos.distracter_audio.data() + k_aud * da, aud_e, da, bg_aud_sigma);
      }
    }

    double* frames = v.frame_feats.data() + j * f * di;
    std::copy_n(img, di, frames);
    for (std::size_t k = 1; k < f; ++k) {
      const double progress = static_cast<double>(k) / static_cast<double>(f - 1);
      for (std::size_t i = 0; i < di; ++i) {
        const double e = normal(rng);
        frames[k * di + i] = img[i] + progress * cfg.motion_scale * motion[i] + frame_sigma * e;
      }
    }
  }
  return v;
}

Dataset gen_dataset(const DatasetConfig& cfg) {
  cfg.validate();
  const Prototypes protos = make_prototypes(cfg);
  const std::size_t c = cfg.num_classes, per = cfg.videos_per_class;
  std::vector<SyntheticVideo> all(c * per);
  parallel_for(all.size(), [&](std::size_t idx) {
    all[idx] = generate_video(cfg, protos, static_cast<std::uint32_t>(idx / per), idx);
  });

  Dataset ds;
  ds.config = cfg;
  const std::size_t n_train = cfg.train_per_class(), n_val = cfg.val_per_class();
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < per; ++i) {
      auto& video = all[k * per + i];
      if (i < n_train) ds.train.push_back(std::move(video));
      else if (i < n_train + n_val) ds.val.push_back(std::move(video));
      else ds.test.push_back(std::move(video));
    }
  }
  return ds;
}

std::string dataset_config_to_json(const DatasetConfig& cfg) {
  nlohmann::json j = {
      {"num_classes", cfg.num_classes},   {"videos_per_class", cfg.videos_per_class},
      {"train_fraction", cfg.train_fraction}, {"val_fraction", cfg.val_fraction},
      {"seq_len", cfg.seq_len},           {"clip_frames", cfg.clip_frames},
      {"image_dim", cfg.image_dim},       {"audio_dim", cfg.audio_dim},
      {"key_len", cfg.key_len},           {"bg_noise", cfg.bg_noise},
      {"visual_snr", cfg.visual_snr},     {"audio_snr", cfg.audio_snr},
      {"motion_scale", cfg.motion_scale}, {"temporal_correlation", cfg.temporal_correlation},
      {"audio_precursor", cfg.audio_precursor},
      {"seed", cfg.seed},
  };
  return j.dump();
}

DatasetConfig dataset_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("dataset: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("dataset: section must be an object");
  DatasetConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "num_classes") cfg.num_classes = value.get<std::size_t>();
      else if (key == "videos_per_class") cfg.videos_per_class = value.get<std::size_t>();
      else if (key == "train_fraction") cfg.train_fraction = value.get<double>();
      else if (key == "val_fraction") cfg.val_fraction = value.get<double>();
      else if (key == "seq_len") cfg.seq_len = value.get<std::size_t>();
      else if (key == "clip_frames") cfg.clip_frames = value.get<std::size_t>();
      else if (key == "image_dim") cfg.image_dim = value.get<std::size_t>();
      else if (key == "audio_dim") cfg.audio_dim = value.get<std::size_t>();
      else if (key == "key_len") cfg.key_len = value.get<std::size_t>();
      else if (key == "bg_noise") cfg.bg_noise = value.get<double>();
      else if (key == "visual_snr") cfg.visual_snr = value.get<double>();
      else if (key == "audio_snr") cfg.audio_snr = value.get<double>();
      else if (key == "motion_scale") cfg.motion_scale = value.get<double>();
      else if (key == "temporal_correlation") cfg.temporal_correlation = value.get<double>();
      else if (key == "audio_precursor") cfg.audio_precursor = value.get<bool>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else throw ConfigError("dataset: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("dataset: wrong value type: ") + e.what());
  }
  return cfg;
}

namespace {
constexpr char kMagic[4] = {'S', 'K', 'N', 'D'};
}

void save_split(const std::filesystem::path& path, const DatasetConfig& cfg,
                const std::vector<SyntheticVideo>& videos) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  io::write_u32(out, kDatasetVersion);
  const std::string echo = dataset_config_to_json(cfg);
  io::write_u64(out, echo.size());
  io::write_bytes(out, echo);
  io::write_u64(out, videos.size());
  for (const auto& v : videos) {
    const std::size_t n = v.seq_len();
    const std::size_t di = v.image_feats.cols(), da = v.audio_feats.cols(), f = v.frame_feats.shape()[1];
    io::write_u32(out, v.label);
    io::write_u64(out, n);
    io::write_u64(out, di);
    io::write_u64(out, da);
    io::write_u64(out, f);
    std::string bits((n + 7) / 8, '\0');
    for (std::size_t j = 0; j < n; ++j) {
      if (v.key_mask[j]) bits[j / 8] = static_cast<char>(bits[j / 8] | (1 << (j % 8)));
    }
    io::write_bytes(out, bits);
    for (double x : v.image_feats.values()) io::write_f64(out, x);
    for (double x : v.audio_feats.values()) io::write_f64(out, x);
    for (double x : v.frame_feats.values()) io::write_f64(out, x);
  }
  if (!out) throw IoError("failed writing dataset split " + path.string());
}

DatasetSplit load_split(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::kMissingFile, "cannot open " + path.string());
  char magic[4];
  io::read_exact(in, magic, 4);
  if (std::string_view(magic, 4) != std::string_view(kMagic, 4)) {
    throw IoError(path.string() + " is not a dataset split (bad magic)");
  }
  const std::uint32_t version = io::read_u32(in);
  if (version != kDatasetVersion) throw IoError("unsupported dataset version " + std::to_string(version));
  DatasetSplit split;
  split.config_json = io::read_string(in, io::read_u64(in));
  const std::uint64_t count = io::read_u64(in);
  split.videos.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    SyntheticVideo v;
    v.label = io::read_u32(in);
    const std::size_t n = io::read_u64(in), di = io::read_u64(in), da = io::read_u64(in),
                      f = io::read_u64(in);
    const std::string bits = io::read_string(in, (n + 7) / 8);
    v.key_mask.resize(n);
    for (std::size_t j = 0; j < n; ++j) v.key_mask[j] = (bits[j / 8] >> (j % 8)) & 1;
    v.image_feats = Tensor({n, di});
    v.audio_feats = Tensor({n, da});
    v.frame_feats = Tensor({n, f, di});
    for (double& x : v.image_feats.values()) x = io::read_f64(in);
    for (double& x : v.audio_feats.values()) x = io::read_f64(in);
    for (double& x : v.frame_feats.values()) x = io::read_f64(in);
    split.videos.push_back(std::move(v));
  }
  return split;
}

}  // namespace skimnet::synth
