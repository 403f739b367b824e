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

#include "skimnet/distill/distill.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "skimnet/error.hpp"
#include "skimnet/format.hpp"
#include "skimnet/numerics/adam.hpp"
#include "skimnet/numerics/ops.hpp"
#include "skimnet/parallel.hpp"
#include "skimnet/rng.hpp"

namespace skimnet::distill {

using models::Binder;
using numerics::Graph;
using numerics::Shape;

void DistillConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("distill: " + m); };
  if (!(lambda >= 0.0)) fail("lambda must be >= 0");
  if (!(learning_rate > 0.0) || !(finetune_learning_rate > 0.0) || !(teacher_learning_rate > 0.0)) {
    fail("learning rates must be positive");
  }
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(temperature > 0.0)) fail("temperature must be positive");
}

std::string distill_config_to_json(const DistillConfig& c) {
  nlohmann::json j = {{"lambda", c.lambda},
                      {"learning_rate", c.learning_rate},
                      {"batch_size", c.batch_size},
                      {"epochs", c.epochs},
                      {"seed", c.seed},
                      {"temperature", c.temperature},
                      {"background_per_video", c.background_per_video},
                      {"modality", models::modality_name(c.modality)},
                      {"finetune_epochs", c.finetune_epochs},
                      {"finetune_learning_rate", c.finetune_learning_rate},
                      {"teacher_epochs", c.teacher_epochs},
                      {"teacher_learning_rate", c.teacher_learning_rate}};
  return j.dump();
}

DistillConfig distill_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("distill: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("distill: section must be an object");
  DistillConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "lambda") c.lambda = v.get<double>();
      else if (key == "learning_rate") c.learning_rate = v.get<double>();
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "epochs") c.epochs = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "temperature") c.temperature = v.get<double>();
      else if (key == "background_per_video") c.background_per_video = v.get<std::size_t>();
      else if (key == "modality") c.modality = models::parse_modality(v.get<std::string>());
      else if (key == "finetune_epochs") c.finetune_epochs = v.get<std::size_t>();
      else if (key == "finetune_learning_rate") c.finetune_learning_rate = v.get<double>();
      else if (key == "teacher_epochs") c.teacher_epochs = v.get<std::size_t>();
      else if (key == "teacher_learning_rate") c.teacher_learning_rate = v.get<double>();
      else throw ConfigError("distill: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("distill: wrong value type: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

void require_distribution(const char* what, const Tensor& p) {
  const std::size_t r = p.rows(), c = p.cols();
  for (std::size_t row = 0; row < r; ++row) {
    double total = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double v = p[row * c + k];
      if (!(v >= 0.0)) throw ValidationError(std::string("kl_soft_target_loss: ") + what + " has a negative entry");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw ValidationError(std::string("kl_soft_target_loss: ") + what + " sums to " + format_double(total));
    }
  }
}

}  // namespace

double kl_soft_target_loss(const Tensor& teacher_probs, const Tensor& student_probs) {
  if (teacher_probs.rows() != student_probs.rows() || teacher_probs.cols() != student_probs.cols()) {
    throw DimensionError("kl_soft_target_loss: teacher " + numerics::shape_string(teacher_probs.shape()) +
                         " vs student " + numerics::shape_string(student_probs.shape()));
  }
  require_distribution("teacher_probs", teacher_probs);
  require_distribution("student_probs", student_probs);
  Graph g(false);
  return numerics::soft_target_cross_entropy(g.constant(student_probs), teacher_probs).value()[0];
}

double l1_feature_loss(const Tensor& teacher_z, const Tensor& fused) {
  if (teacher_z.shape() != fused.shape()) {
    throw DimensionError("l1_feature_loss: z^V " + numerics::shape_string(teacher_z.shape()) + " vs fused " +
                         numerics::shape_string(fused.shape()));
  }
  Graph g(false);
  return numerics::l1_rows(g.constant(teacher_z), g.constant(fused)).value()[0];
}

LossTerms distill_loss(const Tensor& teacher_z, const Tensor& teacher_probs, const Tensor& fused,
                       const Tensor& student_probs, double lambda) {
  LossTerms t;
  t.l1 = l1_feature_loss(teacher_z, fused);
  t.kl = kl_soft_target_loss(teacher_probs, student_probs);
  t.total = t.l1 + lambda * t.kl;
  return t;
}

LossVars distill_loss(Var fused, Var logits, const Tensor& teacher_z, const Tensor& teacher_probs, double lambda,
                      double temperature) {
  Graph& g = fused.graph();
  if (temperature != 1.0) logits = numerics::scale(logits, 1.0 / temperature);
  Var probs = numerics::softmax_rows(logits);
  LossVars v;
  v.l1 = numerics::l1_rows(g.constant(teacher_z), fused);
  v.kl = numerics::soft_target_cross_entropy(probs, teacher_probs);
  v.total = numerics::add(v.l1, numerics::scale(v.kl, lambda));
  return v;
}

Tensor clip_windows(const synth::SyntheticVideo& video) {
  const std::size_t n = video.seq_len();
  const std::size_t w = video.frame_feats.size() / std::max<std::size_t>(n, 1);
  return Tensor({n, w}, video.frame_feats.storage());
}

TeacherCache cache_teacher(const Teacher& teacher, const std::vector<synth::SyntheticVideo>& videos,
                           double temperature) {
  TeacherCache cache;
  cache.z.resize(videos.size());
  cache.probs.resize(videos.size());
  parallel_for(videos.size(), [&](std::size_t i) {
    Graph g(false);
    Binder bind(g, false);
    auto v = teacher.forward(bind, g.constant(clip_windows(videos[i])), g.constant(videos[i].audio_feats));
    Var logits = temperature == 1.0 ? v.logits : numerics::scale(v.logits, 1.0 / temperature);
    cache.z[i] = v.z.value();
    cache.probs[i] = numerics::softmax_rows(logits).value();
  });
  return cache;
}

namespace {

struct Sample {
  std::size_t video;
  std::size_t pos;
};

std::size_t argmax_row(const Tensor& t, std::size_t row) {
  const std::size_t c = t.cols();
  const double* p = t.data() + row * c;
  return static_cast<std::size_t>(std::max_element(p, p + c) - p);
}

/// Key positions of every video plus `background` random other positions,
/// then shuffled.
std::vector<Sample> epoch_samples(const std::vector<synth::SyntheticVideo>& videos, std::size_t background,
                                  Rng& rng) {
  std::vector<Sample> out;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    const auto& mask = videos[v].key_mask;
    std::vector<std::size_t> bg;
    for (std::size_t j = 0; j < mask.size(); ++j) {
      if (mask[j]) out.push_back({v, j});
      else bg.push_back(j);
    }
    const std::size_t take = std::min(background, bg.size());
    for (std::size_t k = 0; k < take; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, bg.size() - 1);
      std::swap(bg[k], bg[pick(rng)]);
      out.push_back({v, bg[k]});
    }
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

/// Copies row `pos` of each sample's source tensor into a batch.
template <typename Get>
Tensor gather(const std::vector<Sample>& samples, std::size_t begin, std::size_t end, std::size_t width, Get get) {
  Tensor out({end - begin, width});
  for (std::size_t i = begin; i < end; ++i) {
    const Tensor& src = get(samples[i].video);
    std::copy_n(src.data() + samples[i].pos * width, width, out.data() + (i - begin) * width);
  }
  return out;
}

void check_finite(const char* stage, std::size_t epoch, std::size_t batch, double loss) {
  if (!std::isfinite(loss)) {
    throw NumericError(std::string(stage) + ": non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                       std::to_string(batch));
  }
}

}  // namespace

double teacher_clip_accuracy(const Teacher& teacher, const std::vector<synth::SyntheticVideo>& videos) {
  if (videos.empty()) return 0.0;
  std::vector<std::size_t> correct(videos.size()), total(videos.size());
  parallel_for(videos.size(), [&](std::size_t i) {
    const auto out = teacher.forward(clip_windows(videos[i]), videos[i].audio_feats);
    for (std::size_t j = 0; j < videos[i].seq_len(); ++j) {
      if (!videos[i].key_mask[j]) continue;
      ++total[i];
      if (argmax_row(out.probs, j) == videos[i].label) ++correct[i];
    }
  });
  const double c = static_cast<double>(std::accumulate(correct.begin(), correct.end(), std::size_t{0}));
  return c / static_cast<double>(std::accumulate(total.begin(), total.end(), std::size_t{0}));
}

double student_clip_accuracy(const Student& student, const std::vector<synth::SyntheticVideo>& videos) {
  if (videos.empty()) return 0.0;
  std::vector<std::size_t> correct(videos.size()), total(videos.size());
  parallel_for(videos.size(), [&](std::size_t i) {
    const auto out = student.forward(videos[i].image_feats, videos[i].audio_feats);
    for (std::size_t j = 0; j < videos[i].seq_len(); ++j) {
      if (!videos[i].key_mask[j]) continue;
      ++total[i];
      if (argmax_row(out.probs, j) == videos[i].label) ++correct[i];
    }
  });
  const double c = static_cast<double>(std::accumulate(correct.begin(), correct.end(), std::size_t{0}));
  return c / static_cast<double>(std::accumulate(total.begin(), total.end(), std::size_t{0}));
}

Teacher train_teacher(const models::ModelDims& dims, const synth::Dataset& data, const DistillConfig& cfg,
                      std::vector<TeacherLogRow>* log) {
  cfg.validate();
  Teacher teacher(dims, derive_seed(cfg.seed, "teacher"));
  const auto& videos = data.train;
  std::vector<Tensor> clips(videos.size());
  for (std::size_t i = 0; i < videos.size(); ++i) clips[i] = clip_windows(videos[i]);

  numerics::AdamConfig ac;
  ac.learning_rate = cfg.teacher_learning_rate;
  numerics::Adam opt(teacher.params().params(), ac);
  Rng rng = make_rng(cfg.seed, "shuffle.teacher");
  const std::size_t c = dims.num_classes;
  for (std::size_t epoch = 1; epoch <= cfg.teacher_epochs; ++epoch) {
    const auto samples = epoch_samples(videos, cfg.background_per_video, rng);
    double sum = 0.0;
    std::size_t batch = 0;
    for (std::size_t b = 0; b < samples.size(); b += cfg.batch_size, ++batch) {
      const std::size_t e = std::min(samples.size(), b + cfg.batch_size);
      Tensor clip = gather(samples, b, e, dims.clip_dim(), [&](std::size_t v) -> const Tensor& { return clips[v]; });
      Tensor aud = gather(samples, b, e, dims.audio_dim,
                          [&](std::size_t v) -> const Tensor& { return videos[v].audio_feats; });
      Tensor target({e - b, c});
      for (std::size_t i = b; i < e; ++i) {
        const auto& vid = videos[samples[i].video];
        if (vid.key_mask[samples[i].pos]) {
          target.at(i - b, vid.label) = 1.0;
        } else {
          for (std::size_t k = 0; k < c; ++k) target.at(i - b, k) = 1.0 / static_cast<double>(c);
        }
      }
      opt.zero_grad();
      Graph g;
      Binder bind(g, true);
      auto out = teacher.forward(bind, g.constant(std::move(clip)), g.constant(std::move(aud)));
      Var loss = numerics::soft_target_cross_entropy(numerics::softmax_rows(out.logits), target);
      check_finite("train_teacher", epoch, batch, loss.value()[0]);
      g.backward(loss);
      opt.step();
      sum += loss.value()[0] * static_cast<double>(e - b);
    }
    if (log) {
      log->push_back({epoch, sum / static_cast<double>(std::max<std::size_t>(samples.size(), 1)),
                      teacher_clip_accuracy(teacher, data.val)});
    }
  }
  teacher.params().zero_grad();
  return teacher;
}

DistillResult train_distill(const synth::Dataset& data, const Teacher& teacher, const models::ModelDims& dims,
                            const DistillConfig& cfg) {
  cfg.validate();
  if (!(teacher.dims() == dims)) throw Error(ErrorCategory::kDimensionConflict, "teacher dims differ from model dims");
  Student student(dims, cfg.modality, derive_seed(cfg.seed, "student"));
  const auto& videos = data.train;
  const TeacherCache cache = cache_teacher(teacher, videos, cfg.temperature);

  std::vector<numerics::Param*> trainable;
  for (numerics::Param* p : student.params().params()) {
    const bool img = p->name.starts_with("student.img.");
    const bool aud = p->name.starts_with("student.aud.");
    if ((img && !student.uses_image()) || (aud && !student.uses_audio())) continue;
    trainable.push_back(p);
  }
  numerics::AdamConfig ac;
  ac.learning_rate = cfg.learning_rate;
  numerics::Adam opt(trainable, ac);
  Rng rng = make_rng(cfg.seed, "shuffle.distill");

  const std::size_t di = dims.image_dim, da = dims.audio_dim, d = dims.feature_dim, c = dims.num_classes;
  auto run_batch = [&](const std::vector<Sample>& samples, std::size_t b, std::size_t e, bool train,
                       std::size_t epoch, std::size_t batch) {
    Tensor img = gather(samples, b, e, di, [&](std::size_t v) -> const Tensor& { return videos[v].image_feats; });
    Tensor aud = gather(samples, b, e, da, [&](std::size_t v) -> const Tensor& { return videos[v].audio_feats; });
    Tensor tz = gather(samples, b, e, d, [&](std::size_t v) -> const Tensor& { return cache.z[v]; });
    Tensor tp = gather(samples, b, e, c, [&](std::size_t v) -> const Tensor& { return cache.probs[v]; });
    Graph g(train);
    Binder bind(g, train);
    try {
      auto out = student.forward(bind, g.constant(std::move(img)), g.constant(std::move(aud)));
      LossVars loss = distill_loss(out.fused, out.logits, tz, tp, cfg.lambda, cfg.temperature);
      check_finite("train_distill", epoch, batch, loss.total.value()[0]);
      if (train) {
        opt.zero_grad();
        g.backward(loss.total);
        opt.step();
      }
      return LossTerms{loss.l1.value()[0], loss.kl.value()[0], loss.total.value()[0]};
    } catch (const NumericError& err) {
      throw NumericError(std::string(err.what()) + " (train_distill epoch " + std::to_string(epoch) + ", batch " +
                         std::to_string(batch) + ")");
    }
  };

  DistillResult result{student, {}};
  auto record = [&](std::size_t epoch, const std::vector<Sample>& samples, bool train) {
    LossTerms sum;
    std::size_t batch = 0;
    for (std::size_t b = 0; b < samples.size(); b += cfg.batch_size, ++batch) {
      const std::size_t e = std::min(samples.size(), b + cfg.batch_size);
      const LossTerms t = run_batch(samples, b, e, train, epoch, batch);
      const double w = static_cast<double>(e - b);
      sum.l1 += w * t.l1;
      sum.kl += w * t.kl;
      sum.total += w * t.total;
    }
    const double n = static_cast<double>(std::max<std::size_t>(samples.size(), 1));
    result.log.push_back({epoch, sum.l1 / n, sum.kl / n, sum.total / n, student_clip_accuracy(student, data.val)});
  };

  // Epoch 0 measures the untrained student on the first epoch's samples.
  Rng probe_rng = make_rng(cfg.seed, "probe.distill");
  record(0, epoch_samples(videos, cfg.background_per_video, probe_rng), false);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    record(epoch, epoch_samples(videos, cfg.background_per_video, rng), true);
  }

  if (cfg.finetune_epochs > 0) {
    numerics::AdamConfig fc;
    fc.learning_rate = cfg.finetune_learning_rate;
    numerics::Adam head(student.params().params_with_prefix("student.cls."), fc);
    Rng ft_rng = make_rng(cfg.seed, "shuffle.finetune");
    for (std::size_t epoch = 1; epoch <= cfg.finetune_epochs; ++epoch) {
      const auto samples = epoch_samples(videos, 0, ft_rng);
      std::size_t batch = 0;
      for (std::size_t b = 0; b < samples.size(); b += cfg.batch_size, ++batch) {
        const std::size_t e = std::min(samples.size(), b + cfg.batch_size);
        Tensor img = gather(samples, b, e, di, [&](std::size_t v) -> const Tensor& { return videos[v].image_feats; });
        Tensor aud = gather(samples, b, e, da, [&](std::size_t v) -> const Tensor& { return videos[v].audio_feats; });
        Tensor target({e - b, c});
        for (std::size_t i = b; i < e; ++i) target.at(i - b, videos[samples[i].video].label) = 1.0;
        Graph g;
        Binder frozen(g, false);
        Binder live(g, true);
        auto zi = student.uses_image() ? std::as_const(student).encode_image(frozen, g.constant(std::move(img))) : Var{};
        auto za = student.uses_audio() ? std::as_const(student).encode_audio(frozen, g.constant(std::move(aud))) : Var{};
        Var fused = std::as_const(student).fuse(frozen, zi, za);
        Var loss = numerics::soft_target_cross_entropy(numerics::softmax_rows(student.classify(live, fused)), target);
        check_finite("finetune", epoch, batch, loss.value()[0]);
        head.zero_grad();
        g.backward(loss);
        head.step();
      }
    }
    result.log.back().val_acc = student_clip_accuracy(student, data.val);
  }
  student.params().zero_grad();
  result.student = std::move(student);
  return result;
}

std::string distill_log_csv(const std::vector<DistillLogRow>& log) {
  std::ostringstream out;
  out << "epoch,l1,kl,total,val_acc\n";
  for (const auto& r : log) {
    out << r.epoch << ',' << format_double(r.l1) << ',' << format_double(r.kl) << ',' << format_double(r.total)
        << ',' << format_double(r.val_acc) << '\n';
  }
  return out.str();
}

}  // namespace skimnet::distill
