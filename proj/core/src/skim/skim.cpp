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

#include "skimnet/skim/skim.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "skimnet/distill/distill.hpp"
#include "skimnet/error.hpp"
#include "skimnet/format.hpp"
#include "skimnet/models/lstm.hpp"
#include "skimnet/numerics/adam.hpp"
#include "skimnet/numerics/ops.hpp"
#include "skimnet/parallel.hpp"
#include "skimnet/rng.hpp"

namespace skimnet::skim {

using numerics::Component;
using numerics::CostScope;
using numerics::Shape;

Tensor attention_weights(const Tensor& keys, const Tensor& query) {
  if (keys.rank() != 2 || keys.rows() == 0) {
    throw DimensionError("attention_weights: keys must be a non-empty [N x d] matrix, got " +
                         numerics::shape_string(keys.shape()));
  }
  Graph g(false);
  const double scale = 1.0 / std::sqrt(static_cast<double>(query.size()));
  Var q = g.constant(query.reshaped({1, query.size()}));
  Var s = numerics::attention_scores(g.constant(keys), q, keys.rows(), scale);
  return numerics::softmax_rows(s).value().reshaped({keys.rows()});
}

Tensor soft_index(const Tensor& weights, const Tensor& feats) {
  if (feats.rank() != 2 || weights.size() != feats.rows()) {
    throw DimensionError("soft_index: " + std::to_string(weights.size()) + " weights for features " +
                         numerics::shape_string(feats.shape()));
  }
  Graph g(false);
  Var w = g.constant(weights.reshaped({1, weights.size()}));
  return numerics::soft_index(w, g.constant(feats)).value().reshaped({feats.cols()});
}

Tensor gate_mix(double s_image, double s_audio, const Tensor& by_image, const Tensor& by_audio) {
  if (by_image.shape() != by_audio.shape()) {
    throw DimensionError("gate_mix: operand shapes " + numerics::shape_string(by_image.shape()) + " and " +
                         numerics::shape_string(by_audio.shape()) + " differ");
  }
  Graph g(false);
  Var s = g.constant(Tensor({1, 2}, {s_image, s_audio}));
  const std::size_t f = by_image.size();
  Var out = numerics::gate_mix(s, g.constant(by_image.reshaped({1, f})), g.constant(by_audio.reshaped({1, f})));
  return out.value().reshaped(by_image.shape());
}

std::size_t kept_count(std::size_t n, std::size_t factor) {
  if (factor == 0) throw ValidationError("subsample factor must be >= 1");
  return n == 0 ? 0 : (n - 1) / factor + 1;
}

Tensor interpolate_features(const Tensor& sparse, std::size_t factor, std::size_t n_target) {
  const std::size_t m = sparse.rows(), f = sparse.cols();
  if (factor == 0) throw ValidationError("interpolate_features: factor must be >= 1");
  if (m == 0 || sparse.rank() != 2 || kept_count(n_target, factor) != m) {
    throw DimensionError("interpolate_features: " + std::to_string(m) + " kept rows at factor " +
                         std::to_string(factor) + " cannot cover " + std::to_string(n_target) + " positions");
  }
  Tensor out({n_target, f});
  std::uint64_t macs = 0;
  for (std::size_t j = 0; j < n_target; ++j) {
    const std::size_t k = j / factor, r = j % factor;
    const double* lo = sparse.data() + k * f;
    double* dst = out.data() + j * f;
    if (r == 0 || k + 1 >= m) {
      std::copy_n(lo, f, dst);
      continue;
    }
    const double* hi = lo + f;
    const double a = static_cast<double>(r) / static_cast<double>(factor);
    for (std::size_t c = 0; c < f; ++c) dst[c] = (1.0 - a) * lo[c] + a * hi[c];
    macs += 2 * f;
  }
  CostScope scope(Component::kInterpolation);
  numerics::charge(macs);
  return out;
}

std::size_t FeatureSequence::length() const {
  if (!image.empty()) return image.rows();
  if (!audio.empty()) return audio.rows();
  return recognition.rows();
}

namespace {

Tensor take_rows(const Tensor& t, std::size_t factor) {
  if (factor == 1) return t;
  const std::size_t m = kept_count(t.rows(), factor), c = t.cols();
  Tensor out({m, c});
  for (std::size_t k = 0; k < m; ++k) std::copy_n(t.data() + k * factor * c, c, out.data() + k * c);
  return out;
}

}  // namespace

FeatureSequence index_features(const Student& student, const synth::SyntheticVideo& video,
                               std::size_t subsample_factor) {
  const std::size_t n = video.seq_len();
  if (n == 0) throw ValidationError("index_features: empty video");
  Graph g(false);
  Binder bind(g, false);
  FeatureSequence out;
  if (student.uses_image()) {
    Tensor z = student.encode_image(bind, g.constant(take_rows(video.image_feats, subsample_factor))).value();
    out.image = subsample_factor == 1 ? std::move(z) : interpolate_features(z, subsample_factor, n);
  }
  if (student.uses_audio()) {
    Tensor z = student.encode_audio(bind, g.constant(take_rows(video.audio_feats, subsample_factor))).value();
    out.audio = subsample_factor == 1 ? std::move(z) : interpolate_features(z, subsample_factor, n);
  }
  return out;
}

Tensor recognition_features(const Teacher& teacher, const synth::SyntheticVideo& video) {
  Graph g(false);
  Binder bind(g, false);
  return teacher.forward(bind, g.constant(distill::clip_windows(video)), g.constant(video.audio_feats)).z.value();
}

std::vector<std::size_t> SkimTrace::selected() const {
  std::vector<std::size_t> out;
  for (const auto& s : steps) {
    if (std::find(out.begin(), out.end(), s.argmax_mixed) == out.end()) out.push_back(s.argmax_mixed);
  }
  return out;
}

namespace {

template <typename SkimmerT>
SkimGraph skim_graph_impl(Binder& bind, SkimmerT& sk, const FuseFn& fuse, Var zi, Var za, Var recog,
                          std::size_t batch, std::size_t n, std::size_t steps) {
  if (steps < 1) throw ValidationError("skim_forward: steps must be >= 1");
  if (n < 1) throw ValidationError("skim_forward: empty sequence");
  const bool img = sk.uses_image(), aud = sk.uses_audio();
  if ((img && !zi.valid()) || (aud && !za.valid())) throw ValidationError("skim_forward: missing indexing stream");
  Graph& g = bind.graph();
  const auto& dims = sk.dims();
  const std::size_t h = dims.lstm_hidden;
  auto& params = sk.params();
  auto P = [&](const std::string& name) { return bind(params.get(name)); };
  const double scale = 1.0 / std::sqrt(static_cast<double>(dims.key_dim));

  Var keys_i, keys_a;
  {
    CostScope scope(Component::kQueryKeyGate);
    if (img) keys_i = models::linear(bind, params, sk.image_key(), zi);
    if (aud) keys_a = models::linear(bind, params, sk.audio_key(), za);
  }

  const bool use_recog = recog.valid();
  Var zi_t, za_t, r_t;
  {
    CostScope scope(Component::kAttention);
    Var uniform = g.constant(Tensor::filled({batch, n}, 1.0 / static_cast<double>(n)));
    if (img) zi_t = numerics::soft_index(uniform, zi);
    if (aud) za_t = numerics::soft_index(uniform, za);
    if (use_recog) r_t = numerics::soft_index(uniform, recog);
  }

  SkimGraph out;
  Var pool;
  Var hs = g.constant(Tensor({batch, h}));
  Var cs = g.constant(Tensor({batch, h}));
  for (std::size_t t = 1; t <= steps; ++t) {
    const bool last = t == steps;
    Var fused;
    if (!use_recog || !last) fused = fuse(zi_t, za_t);
    Var contribution = use_recog ? r_t : fused;
    pool = pool.valid() ? numerics::add(pool, contribution) : contribution;
    if (last) break;

    {
      CostScope scope(Component::kLstm);
      auto st = models::lstm_step(fused, hs, cs, P("skim.lstm.W"), P("skim.lstm.b"));
      hs = st.h;
      cs = st.c;
    }
    StepVars sv;
    Var qi, qa;
    {
      CostScope scope(Component::kQueryKeyGate);
      if (img) qi = models::mlp(bind, params, "skim.qi", 2, hs);
      if (aud) qa = models::mlp(bind, params, "skim.qa", 2, hs);
      if (img && aud) sv.gate = numerics::softmax_rows(models::dense(bind, params, "skim.gate", hs));
    }
    CostScope scope(Component::kAttention);
    if (img) sv.w_image = numerics::softmax_rows(numerics::attention_scores(keys_i, qi, n, scale));
    if (aud) sv.w_audio = numerics::softmax_rows(numerics::attention_scores(keys_a, qa, n, scale));
    auto mix = [&](Var feats) {
      if (img && aud) {
        return numerics::gate_mix(sv.gate, numerics::soft_index(sv.w_image, feats),
                                  numerics::soft_index(sv.w_audio, feats));
      }
      return numerics::soft_index(img ? sv.w_image : sv.w_audio, feats);
    };
    if (img) zi_t = mix(zi);
    if (aud) za_t = mix(za);
    if (use_recog) r_t = mix(recog);
    sv.z_image = zi_t;
    sv.z_audio = za_t;
    out.steps.push_back(sv);
  }
  out.pooled = numerics::scale(pool, 1.0 / static_cast<double>(steps));
  CostScope scope(Component::kClassifier);
  out.logits = models::dense(bind, params, "skim.cls", out.pooled);
  return out;
}

std::vector<double> row_of(const Var& v, std::size_t b) {
  if (!v.valid()) return {};
  const Tensor& t = v.value();
  const std::size_t c = t.cols();
  return std::vector<double>(t.data() + b * c, t.data() + (b + 1) * c);
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

SkimGraph skim_graph(Binder& bind, const Skimmer& skimmer, const FuseFn& fuse, Var zi, Var za, Var recognition,
                     std::size_t batch, std::size_t n, std::size_t steps) {
  return skim_graph_impl(bind, skimmer, fuse, zi, za, recognition, batch, n, steps);
}

SkimGraph skim_graph(Binder& bind, Skimmer& skimmer, const FuseFn& fuse, Var zi, Var za, Var recognition,
                     std::size_t batch, std::size_t n, std::size_t steps) {
  return skim_graph_impl(bind, skimmer, fuse, zi, za, recognition, batch, n, steps);
}

SkimTrace extract_trace(const SkimGraph& g, std::size_t b) {
  SkimTrace trace;
  for (const StepVars& sv : g.steps) {
    SkimStep s;
    s.w_image = row_of(sv.w_image, b);
    s.w_audio = row_of(sv.w_audio, b);
    if (sv.gate.valid()) {
      s.s_image = sv.gate.value()[2 * b];
      s.s_audio = sv.gate.value()[2 * b + 1];
    } else if (s.w_image.empty()) {
      s.s_image = 0.0;
      s.s_audio = 1.0;
    }
    if (!s.w_image.empty()) s.argmax_image = argmax(s.w_image);
    if (!s.w_audio.empty()) s.argmax_audio = argmax(s.w_audio);
    const std::size_t n = std::max(s.w_image.size(), s.w_audio.size());
    std::vector<double> mixed(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (!s.w_image.empty()) mixed[j] += s.s_image * s.w_image[j];
      if (!s.w_audio.empty()) mixed[j] += s.s_audio * s.w_audio[j];
    }
    s.argmax_mixed = argmax(mixed);
    s.z_image = row_of(sv.z_image, b);
    s.z_audio = row_of(sv.z_audio, b);
    trace.steps.push_back(std::move(s));
  }
  return trace;
}

namespace {

SkimResult forward_features(const FeatureSequence& features, const Skimmer& skimmer, std::size_t steps) {
  skimmer.check_fusion();
  const std::size_t n = features.length();
  Graph g(false);
  Binder bind(g, false);
  const Student& student = skimmer.student();
  FuseFn fuse = [&](Var zi, Var za) { return student.fuse(bind, zi, za); };
  Var zi = features.image.empty() ? Var{} : g.constant(features.image);
  Var za = features.audio.empty() ? Var{} : g.constant(features.audio);
  Var rec = features.recognition.empty() ? Var{} : g.constant(features.recognition);
  SkimGraph sg = skim_graph(bind, skimmer, fuse, zi, za, rec, 1, n, steps);
  SkimResult r;
  r.pooled = sg.pooled.value().reshaped({sg.pooled.value().size()});
  Tensor probs = numerics::softmax_rows(sg.logits).value();
  r.probs = probs.reshaped({probs.size()});
  r.trace = extract_trace(sg, 0);
  return r;
}

}  // namespace

SkimResult skim_forward(const FeatureSequence& features, const Skimmer& skimmer, std::size_t steps) {
  return forward_features(features, skimmer, steps);
}

void InferenceBudget::validate() const {
  if (t_stop < 1) throw ValidationError("budget: t_stop must be >= 1");
  if (subsample_factor < 1) throw ValidationError("budget: subsample_factor must be >= 1");
}

InferResult skim_infer(const synth::SyntheticVideo& video, const Skimmer& skimmer, const InferenceBudget& budget,
                       const Teacher* teacher) {
  budget.validate();
  InferResult out;
  numerics::CostMeter meter;
  FeatureSequence feats = index_features(skimmer.student(), video, budget.subsample_factor);
  if (budget.use_recognition_features) {
    if (!teacher) throw ValidationError("skim_infer: recognition features need a teacher");
    feats.recognition = recognition_features(*teacher, video);
  }
  SkimResult r = forward_features(feats, skimmer, budget.t_stop);
  out.probs = std::move(r.probs);
  out.trace = std::move(r.trace);
  out.cost = meter.ledger();
  if (budget.t_stop > skimmer.trained_steps()) {
    out.warning = "t_stop " + std::to_string(budget.t_stop) + " exceeds the " +
                  std::to_string(skimmer.trained_steps()) + " steps used in training";
  }
  return out;
}

void SkimConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("skim: " + m); };
  if (steps < 1) fail("steps must be >= 1");
  if (!(learning_rate > 0.0) || !(lstm_baseline_learning_rate > 0.0)) fail("learning rates must be positive");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(clip_norm >= 0.0)) fail("clip_norm must be >= 0");
}

std::string skim_config_to_json(const SkimConfig& c) {
  nlohmann::json j = {{"steps", c.steps},
                      {"learning_rate", c.learning_rate},
                      {"batch_size", c.batch_size},
                      {"epochs", c.epochs},
                      {"seed", c.seed},
                      {"clip_norm", c.clip_norm},
                      {"finetune_fusion", c.finetune_fusion},
                      {"finetune_encoders", c.finetune_encoders},
                      {"train_lstm_baseline", c.train_lstm_baseline},
                      {"lstm_baseline_epochs", c.lstm_baseline_epochs},
                      {"lstm_baseline_learning_rate", c.lstm_baseline_learning_rate}};
  return j.dump();
}

SkimConfig skim_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("skim: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("skim: section must be an object");
  SkimConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "steps") c.steps = v.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = v.get<double>();
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "epochs") c.epochs = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "clip_norm") c.clip_norm = v.get<double>();
      else if (key == "finetune_fusion") c.finetune_fusion = v.get<bool>();
      else if (key == "finetune_encoders") c.finetune_encoders = v.get<bool>();
      else if (key == "train_lstm_baseline") c.train_lstm_baseline = v.get<bool>();
      else if (key == "lstm_baseline_epochs") c.lstm_baseline_epochs = v.get<std::size_t>();
      else if (key == "lstm_baseline_learning_rate") c.lstm_baseline_learning_rate = v.get<double>();
      else throw ConfigError("skim: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("skim: wrong value type: ") + e.what());
  }
  c.validate();
  return c;
}

double skim_accuracy(const Skimmer& skimmer, const std::vector<synth::SyntheticVideo>& videos,
                     const InferenceBudget& budget, const Teacher* teacher) {
  if (videos.empty()) throw Error(ErrorCategory::kEvaluation, "skim_accuracy: empty video list");
  std::vector<std::uint8_t> hit(videos.size());
  parallel_for(videos.size(), [&](std::size_t i) {
    const InferResult r = skim_infer(videos[i], skimmer, budget, teacher);
    const auto p = r.probs.values();
    hit[i] = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()) == videos[i].label;
  });
  return static_cast<double>(std::accumulate(hit.begin(), hit.end(), std::size_t{0})) /
         static_cast<double>(videos.size());
}

namespace {

Tensor stack_rows(const std::vector<const Tensor*>& parts) {
  const std::size_t c = parts.front()->cols();
  std::size_t rows = 0;
  for (const Tensor* p : parts) rows += p->rows();
  Tensor out({rows, c});
  double* dst = out.data();
  for (const Tensor* p : parts) dst = std::copy_n(p->data(), p->size(), dst);
  return out;
}

}  // namespace

SkimTrainResult train_skim(const synth::Dataset& data, Student& student, const models::ModelDims& dims,
                           const SkimConfig& cfg) {
  cfg.validate();
  Skimmer skimmer(dims, student, derive_seed(cfg.seed, "skimmer"));
  skimmer.set_trained_steps(cfg.steps);
  const auto& videos = data.train;
  if (videos.empty()) throw ValidationError("train_skim: no training videos");
  const std::size_t n = videos.front().seq_len(), c = dims.num_classes;

  std::vector<FeatureSequence> cached;
  if (!cfg.finetune_encoders) {
    cached.resize(videos.size());
    parallel_for(videos.size(), [&](std::size_t i) { cached[i] = index_features(student, videos[i], 1); });
  }

  std::vector<numerics::Param*> trainable = skimmer.params().params();
  auto add_student = [&](const char* prefix) {
    for (numerics::Param* p : student.params().params_with_prefix(prefix)) trainable.push_back(p);
  };
  if (cfg.finetune_fusion) add_student("student.psi.");
  if (cfg.finetune_encoders) {
    if (student.uses_image()) add_student("student.img.");
    if (student.uses_audio()) add_student("student.aud.");
  }
  numerics::AdamConfig ac;
  ac.learning_rate = cfg.learning_rate;
  ac.clip_norm = cfg.clip_norm;
  numerics::Adam opt(trainable, ac);
  Rng rng = make_rng(cfg.seed, "shuffle.skim");

  SkimTrainResult result{skimmer, {}};
  const InferenceBudget val_budget{cfg.steps, 1, false};
  auto val_acc = [&]() { return data.val.empty() ? 0.0 : skim_accuracy(skimmer, data.val, val_budget); };
  result.log.push_back({0, 0.0, 0.0, val_acc()});

  std::vector<std::size_t> order(videos.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0, batch_index = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size, ++batch_index) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size), bs = e - b;
      Graph g(true);
      Binder skim_bind(g, true);
      Binder student_bind(g, cfg.finetune_fusion || cfg.finetune_encoders);
      try {
        Var zi, za;
        if (cfg.finetune_encoders) {
          std::vector<const Tensor*> img, aud;
          for (std::size_t k = b; k < e; ++k) {
            img.push_back(&videos[order[k]].image_feats);
            aud.push_back(&videos[order[k]].audio_feats);
          }
          if (student.uses_image()) zi = student.encode_image(student_bind, g.constant(stack_rows(img)));
          if (student.uses_audio()) za = student.encode_audio(student_bind, g.constant(stack_rows(aud)));
        } else {
          std::vector<const Tensor*> img, aud;
          for (std::size_t k = b; k < e; ++k) {
            img.push_back(&cached[order[k]].image);
            aud.push_back(&cached[order[k]].audio);
          }
          if (student.uses_image()) zi = g.constant(stack_rows(img));
          if (student.uses_audio()) za = g.constant(stack_rows(aud));
        }
        Binder frozen(g, false);
        FuseFn fuse = [&](Var a, Var z) {
          return cfg.finetune_fusion ? student.fuse(student_bind, a, z) : std::as_const(student).fuse(frozen, a, z);
        };
        SkimGraph sg = skim_graph(skim_bind, skimmer, fuse, zi, za, Var{}, bs, n, cfg.steps);
        Tensor target({bs, c});
        for (std::size_t k = b; k < e; ++k) target.at(k - b, videos[order[k]].label) = 1.0;
        Var probs = numerics::softmax_rows(sg.logits);
        Var loss = numerics::soft_target_cross_entropy(probs, target);
        opt.zero_grad();
        g.backward(loss);
        opt.step();
        loss_sum += loss.value()[0] * static_cast<double>(bs);
        for (std::size_t k = 0; k < bs; ++k) {
          const double* row = probs.value().data() + k * c;
          if (static_cast<std::size_t>(std::max_element(row, row + c) - row) == videos[order[b + k]].label) ++correct;
        }
      } catch (const NumericError& err) {
        throw NumericError(std::string(err.what()) + " (train_skim epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ", " + std::to_string(cfg.steps) + " unrolled steps)");
      }
    }
    if (cfg.finetune_fusion) skimmer.rebind_fusion();
    const double total = static_cast<double>(order.size());
    result.log.push_back({epoch, loss_sum / total, static_cast<double>(correct) / total, val_acc()});
  }
  skimmer.params().zero_grad();
  student.params().zero_grad();
  if (cfg.finetune_fusion) skimmer.rebind_fusion();
  result.skimmer = std::move(skimmer);
  return result;
}

std::string skim_log_csv(const std::vector<SkimLogRow>& log) {
  std::ostringstream out;
  out << "epoch,loss,train_acc,val_acc\n";
  for (const auto& r : log) {
    out << r.epoch << ',' << format_double(r.loss) << ',' << format_double(r.train_acc) << ','
        << format_double(r.val_acc) << '\n';
  }
  return out.str();
}

namespace {

double entropy(const std::vector<double>& w) {
  double h = 0.0;
  for (double p : w) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace

std::string trace_to_json(const SkimTrace& trace, std::uint32_t label, const Tensor& probs) {
  nlohmann::json j;
  j["label"] = label;
  const auto p = probs.values();
  j["prediction"] = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  j["probs"] = std::vector<double>(p.begin(), p.end());
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : trace.steps) {
    nlohmann::json st = {{"argmax", s.argmax_mixed}, {"gate", {s.s_image, s.s_audio}}};
    if (!s.w_image.empty()) {
      st["argmax_image"] = s.argmax_image;
      st["entropy_image"] = entropy(s.w_image);
    }
    if (!s.w_audio.empty()) {
      st["argmax_audio"] = s.argmax_audio;
      st["entropy_audio"] = entropy(s.w_audio);
    }
    steps.push_back(std::move(st));
  }
  j["steps"] = std::move(steps);
  return j.dump();
}

}  // namespace skimnet::skim
