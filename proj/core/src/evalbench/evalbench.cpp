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

#include "skimnet/evalbench/evalbench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <numeric>
#include <random>
#include <sstream>

#include "skimnet/error.hpp"
#include "skimnet/format.hpp"
#include "skimnet/models/checkpoint.hpp"
#include "skimnet/models/lstm.hpp"
#include "skimnet/numerics/adam.hpp"
#include "skimnet/numerics/ops.hpp"
#include "skimnet/parallel.hpp"
#include "skimnet/rng.hpp"

namespace skimnet::evalbench {

using models::Binder;
using models::ModelDims;
using models::Modality;
using numerics::Component;
using numerics::CostMeter;
using numerics::CostScope;
using numerics::Graph;
using numerics::Var;

namespace {

struct NamedStrategy {
  Strategy strategy;
  std::string_view name;
};

constexpr NamedStrategy kStrategies[] = {
    {Strategy::kRandom, "random"},       {Strategy::kUniform, "uniform"},
    {Strategy::kFront, "front"},         {Strategy::kCenter, "center"},
    {Strategy::kEnd, "end"},             {Strategy::kDense, "dense"},
    {Strategy::kScSampler, "scsampler"}, {Strategy::kLstm, "lstm"},
    {Strategy::kNonRecurrent, "nonrecurrent"}, {Strategy::kOurs, "ours"},
};

}  // namespace

std::string_view strategy_name(Strategy s) {
  for (const auto& e : kStrategies) {
    if (e.strategy == s) return e.name;
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  std::string valid;
  for (const auto& e : kStrategies) {
    if (e.name == name) return e.strategy;
    valid += (valid.empty() ? "" : ", ") + std::string(e.name);
  }
  throw ConfigError("unknown strategy '" + std::string(name) + "' (valid: " + valid + ")");
}

const std::vector<Strategy>& all_strategies() {
  static const std::vector<Strategy> all = [] {
    std::vector<Strategy> v;
    for (const auto& e : kStrategies) v.push_back(e.strategy);
    return v;
  }();
  return all;
}

bool has_selection(Strategy s) { return s != Strategy::kDense && s != Strategy::kLstm; }

// ---------------------------------------------------------------- LSTM baseline

LstmBaseline::LstmBaseline(const ModelDims& dims, std::uint64_t seed) : dims_(dims) {
  dims_.validate();
  Rng rng = make_rng(seed, "init.lstm_baseline");
  models::init_dense(params_, "lstmb.lstm", 4 * dims.lstm_hidden, dims.feature_dim + dims.lstm_hidden, rng);
  models::init_dense(params_, "lstmb.head", dims.num_classes, dims.lstm_hidden, rng);
}

LstmBaseline::LstmBaseline(const ModelDims& dims, numerics::ParamStore params)
    : dims_(dims), params_(std::move(params)) {
  dims_.validate();
  const std::size_t h = dims.lstm_hidden;
  models::require_shape(params_, "lstmb.lstm.W", {4 * h, dims.feature_dim + h});
  models::require_shape(params_, "lstmb.lstm.b", {4 * h});
  models::require_shape(params_, "lstmb.head.W", {dims.num_classes, h});
  models::require_shape(params_, "lstmb.head.b", {dims.num_classes});
}

namespace {

template <typename Store>
Var lstm_baseline_forward(const ModelDims& dims, Binder& bind, Store& params, const std::vector<Var>& inputs) {
  if (inputs.empty()) throw ValidationError("lstm baseline: empty sequence");
  Graph& g = bind.graph();
  const std::size_t batch = inputs.front().rows();
  Var h = g.constant(Tensor({batch, dims.lstm_hidden}));
  Var c = g.constant(Tensor({batch, dims.lstm_hidden}));
  {
    CostScope scope(Component::kLstm);
    Var w = bind(params.get("lstmb.lstm.W"));
    Var b = bind(params.get("lstmb.lstm.b"));
    for (const Var& x : inputs) {
      auto st = models::lstm_step(x, h, c, w, b);
      h = st.h;
      c = st.c;
    }
  }
  CostScope scope(Component::kClassifier);
  return models::dense(bind, params, "lstmb.head", h);
}

/// Rows of Psi(z_j) for a video, [N x D].
Tensor fused_sequence(const models::Student& student, const synth::SyntheticVideo& video) {
  Graph g(false);
  Binder bind(g, false);
  Var zi = student.uses_image() ? student.encode_image(bind, g.constant(video.image_feats)) : Var{};
  Var za = student.uses_audio() ? student.encode_audio(bind, g.constant(video.audio_feats)) : Var{};
  return student.fuse(bind, zi, za).value();
}

std::vector<Var> step_inputs(Graph& g, const std::vector<const Tensor*>& fused) {
  const std::size_t n = fused.front()->rows(), d = fused.front()->cols(), batch = fused.size();
  std::vector<Var> steps;
  steps.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    Tensor x({batch, d});
    for (std::size_t b = 0; b < batch; ++b) std::copy_n(fused[b]->data() + j * d, d, x.data() + b * d);
    steps.push_back(g.constant(std::move(x)));
  }
  return steps;
}

}  // namespace

Var LstmBaseline::forward(Binder& bind, const std::vector<Var>& inputs) {
  return lstm_baseline_forward(dims_, bind, params_, inputs);
}

Var LstmBaseline::forward(Binder& bind, const std::vector<Var>& inputs) const {
  return lstm_baseline_forward(dims_, bind, params_, inputs);
}

LstmBaseline train_lstm_baseline(const synth::Dataset& data, const models::Student& student,
                                 const LstmBaselineConfig& cfg) {
  LstmBaseline model(student.dims(), derive_seed(cfg.seed, "lstm_baseline"));
  const auto& videos = data.train;
  std::vector<Tensor> fused(videos.size());
  parallel_for(videos.size(), [&](std::size_t i) { fused[i] = fused_sequence(student, videos[i]); });

  numerics::AdamConfig ac;
  ac.learning_rate = cfg.learning_rate;
  ac.clip_norm = cfg.clip_norm;
  numerics::Adam opt(model.params().params(), ac);
  Rng rng = make_rng(cfg.seed, "shuffle.lstm_baseline");
  std::vector<std::size_t> order(videos.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t c = student.dims().num_classes;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t batch_index = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size, ++batch_index) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      std::vector<const Tensor*> rows;
      Tensor target({e - b, c});
      for (std::size_t k = b; k < e; ++k) {
        rows.push_back(&fused[order[k]]);
        target.at(k - b, videos[order[k]].label) = 1.0;
      }
      Graph g;
      Binder bind(g, true);
      try {
        Var logits = model.forward(bind, step_inputs(g, rows));
        Var loss = numerics::soft_target_cross_entropy(numerics::softmax_rows(logits), target);
        opt.zero_grad();
        g.backward(loss);
        opt.step();
      } catch (const NumericError& err) {
        throw NumericError(std::string(err.what()) + " (lstm baseline epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_index) + ")");
      }
    }
  }
  model.params().zero_grad();
  return model;
}

void save_lstm_baseline(const LstmBaseline& model, const std::filesystem::path& path) {
  numerics::save_params(model.params(), path);
  nlohmann::json j = {{"kind", "lstm_baseline"},
                      {"dims", nlohmann::json::parse(models::model_dims_to_sidecar(model.dims()))}};
  std::ofstream out(models::sidecar_path(path), std::ios::trunc);
  if (!out) throw IoError("cannot write " + models::sidecar_path(path).string());
  out << j.dump(2) << '\n';
}

LstmBaseline load_lstm_baseline(const std::filesystem::path& path, const ModelDims& expected) {
  std::ifstream in(models::sidecar_path(path));
  if (!in) throw Error(ErrorCategory::kMissingFile, "missing checkpoint sidecar " + models::sidecar_path(path).string());
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed checkpoint sidecar: " + std::string(e.what()));
  }
  if (j.value("kind", std::string()) != "lstm_baseline" || !j.contains("dims")) {
    throw IoError(path.string() + " is not an lstm_baseline checkpoint");
  }
  const ModelDims dims = models::model_dims_from_sidecar(j["dims"].dump());
  if (!(dims == expected)) {
    throw Error(ErrorCategory::kDimensionConflict, path.string() + ": checkpoint architecture conflicts with configuration");
  }
  try {
    return LstmBaseline(dims, numerics::load_params(path));
  } catch (const DimensionError& e) {
    throw Error(ErrorCategory::kDimensionConflict, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- selection helpers

std::vector<std::size_t> top_k(const std::vector<double>& values, std::size_t k) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) { return values[a] > values[b] || (values[a] == values[b] && a < b); });
  idx.resize(k);
  return idx;
}

std::vector<std::size_t> uniform_indices(std::size_t n, std::size_t count) {
  const std::size_t k = std::min(count, n);
  std::vector<std::size_t> out;
  if (k == 0) return out;
  if (k == 1) return {0};
  for (std::size_t j = 0; j < k; ++j) {
    out.push_back(static_cast<std::size_t>(
        std::llround(static_cast<double>(j) * static_cast<double>(n - 1) / static_cast<double>(k - 1))));
  }
  return out;
}

double selection_recall(const std::vector<std::size_t>& selected, const std::vector<std::uint8_t>& key_mask) {
  if (selected.empty()) throw ValidationError("selection_recall: empty selection");
  const std::size_t l = static_cast<std::size_t>(std::count(key_mask.begin(), key_mask.end(), std::uint8_t{1}));
  if (l == 0) throw ValidationError("selection_recall: key mask has no key time stamps");
  std::vector<std::size_t> uniq = selected;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::size_t hits = 0;
  for (std::size_t j : uniq) {
    if (j >= key_mask.size()) throw ValidationError("selection_recall: index " + std::to_string(j) + " out of range");
    hits += key_mask[j] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(std::min(uniq.size(), l));
}

// ---------------------------------------------------------------- strategies

namespace {

Tensor gather_rows(const Tensor& t, const std::vector<std::size_t>& rows) {
  const std::size_t c = t.cols();
  Tensor out({rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy_n(t.data() + rows[i] * c, c, out.data() + i * c);
  return out;
}

Tensor mean_rows(const Tensor& t) {
  const std::size_t r = t.rows(), c = t.cols();
  Tensor out({c});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t k = 0; k < c; ++k) out[k] += t[i * c + k];
  }
  for (std::size_t k = 0; k < c; ++k) out[k] /= static_cast<double>(r);
  return out;
}

std::vector<std::size_t> fixed_selection(Strategy s, std::size_t n, std::uint64_t seed, std::uint64_t video_index) {
  const std::size_t k = std::min(kSelectCount, n);
  std::vector<std::size_t> out(k);
  switch (s) {
    case Strategy::kRandom: {
      Rng rng = make_rng(seed, "strategy.random", video_index);
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), std::size_t{0});
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(all[i], all[pick(rng)]);
      }
      out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(out.begin(), out.end());
      return out;
    }
    case Strategy::kUniform: return uniform_indices(n, kSelectCount);
    case Strategy::kFront: std::iota(out.begin(), out.end(), std::size_t{0}); return out;
    case Strategy::kCenter: std::iota(out.begin(), out.end(), (n - k) / 2); return out;
    case Strategy::kEnd: std::iota(out.begin(), out.end(), n - k); return out;
    default: throw ValidationError("not a fixed selection strategy");
  }
}

StrategyOutput non_recurrent(const synth::SyntheticVideo& video, const ModelSet& m) {
  const models::Skimmer& sk = *m.skimmer;
  sk.check_fusion();
  const models::Student& student = sk.student();
  const ModelDims& dims = sk.dims();
  const std::size_t n = video.seq_len();
  const bool img = student.uses_image(), aud = student.uses_audio();
  StrategyOutput out;
  CostMeter meter;
  const skim::FeatureSequence feats = skim::index_features(student, video, 1);

  Graph g(false);
  Binder bind(g, false);
  const auto& params = sk.params();
  Var zi = img ? g.constant(feats.image) : Var{};
  Var za = aud ? g.constant(feats.audio) : Var{};
  Var ki, ka;
  {
    CostScope scope(Component::kQueryKeyGate);
    if (img) ki = models::linear(bind, params, sk.image_key(), zi);
    if (aud) ka = models::linear(bind, params, sk.audio_key(), za);
  }
  Var ui, ua;
  {
    CostScope scope(Component::kAttention);
    Var uniform = g.constant(Tensor::filled({1, n}, 1.0 / static_cast<double>(n)));
    if (img) ui = numerics::soft_index(uniform, zi);
    if (aud) ua = numerics::soft_index(uniform, za);
  }
  Var fused = student.fuse(bind, ui, ua);
  Var h;
  {
    CostScope scope(Component::kLstm);
    const std::size_t hd = dims.lstm_hidden;
    auto st = models::lstm_step(fused, g.constant(Tensor({1, hd})), g.constant(Tensor({1, hd})),
                                bind(params.get("skim.lstm.W")), bind(params.get("skim.lstm.b")));
    h = st.h;
  }
  Var qi, qa, gate;
  {
    CostScope scope(Component::kQueryKeyGate);
    if (img) qi = models::mlp(bind, params, "skim.qi", 2, h);
    if (aud) qa = models::mlp(bind, params, "skim.qa", 2, h);
    if (img && aud) gate = numerics::softmax_rows(models::dense(bind, params, "skim.gate", h));
  }
  Var weights;
  {
    CostScope scope(Component::kAttention);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims.key_dim));
    Var wi = img ? numerics::softmax_rows(numerics::attention_scores(ki, qi, n, scale)) : Var{};
    Var wa = aud ? numerics::softmax_rows(numerics::attention_scores(ka, qa, n, scale)) : Var{};
    weights = img && aud ? numerics::gate_mix(gate, wi, wa) : (img ? wi : wa);
  }
  const auto wv = weights.value().values();
  out.selected = top_k(std::vector<double>(wv.begin(), wv.end()), kSelectCount);

  Var sel_i = img ? g.constant(gather_rows(feats.image, out.selected)) : Var{};
  Var sel_a = aud ? g.constant(gather_rows(feats.audio, out.selected)) : Var{};
  Var logits = student.classify(bind, student.fuse(bind, sel_i, sel_a));
  out.probs = mean_rows(numerics::softmax_rows(logits).value());
  out.cost = meter.ledger();
  return out;
}

}  // namespace

StrategyOutput run_strategy(Strategy strategy, const synth::SyntheticVideo& video, const ModelSet& m,
                            const skim::InferenceBudget& budget, std::uint64_t seed, std::uint64_t video_index) {
  if (!m.student) throw ValidationError("run_strategy: a student model is required");
  const std::size_t n = video.seq_len();
  if (n == 0) throw ValidationError("run_strategy: empty video");
  const models::Student& student = *m.student;
  StrategyOutput out;
  switch (strategy) {
    case Strategy::kRandom:
    case Strategy::kUniform:
    case Strategy::kFront:
    case Strategy::kCenter:
    case Strategy::kEnd: {
      out.selected = fixed_selection(strategy, n, seed, video_index);
      CostMeter meter;
      const auto probs =
          student.forward(gather_rows(video.image_feats, out.selected), gather_rows(video.audio_feats, out.selected)).probs;
      out.probs = mean_rows(probs);
      out.cost = meter.ledger();
      return out;
    }
    case Strategy::kDense:
    case Strategy::kScSampler: {
      CostMeter meter;
      const Tensor probs = student.forward(video.image_feats, video.audio_feats).probs;
      out.cost = meter.ledger();
      if (strategy == Strategy::kDense) {
        out.probs = mean_rows(probs);
        return out;
      }
      std::vector<double> confidence(n);
      const std::size_t c = probs.cols();
      for (std::size_t j = 0; j < n; ++j) {
        confidence[j] = *std::max_element(probs.data() + j * c, probs.data() + (j + 1) * c);
      }
      out.selected = top_k(confidence, kSelectCount);
      out.probs = mean_rows(gather_rows(probs, out.selected));
      return out;
    }
    case Strategy::kLstm: {
      if (!m.lstm) throw ValidationError("run_strategy: the lstm strategy needs a trained LSTM baseline");
      CostMeter meter;
      const Tensor fused = fused_sequence(student, video);
      Graph g(false);
      Binder bind(g, false);
      Var logits = m.lstm->forward(bind, step_inputs(g, {&fused}));
      const Tensor p = numerics::softmax_rows(logits).value();
      out.probs = p.reshaped({p.size()});
      out.cost = meter.ledger();
      return out;
    }
    case Strategy::kNonRecurrent:
      if (!m.skimmer) throw ValidationError("run_strategy: the nonrecurrent strategy needs a trained skimmer");
      return non_recurrent(video, m);
    case Strategy::kOurs: {
      if (!m.skimmer) throw ValidationError("run_strategy: the ours strategy needs a trained skimmer");
      skim::InferResult r = skim::skim_infer(video, *m.skimmer, budget, m.teacher);
      out.probs = std::move(r.probs);
      out.selected = r.trace.selected();
      out.cost = r.cost;
      out.warning = std::move(r.warning);
      out.trace = std::move(r.trace);
      return out;
    }
  }
  throw ValidationError("run_strategy: unhandled strategy");
}

// ---------------------------------------------------------------- cost model

std::uint64_t flop_count(std::string_view component, const std::vector<std::size_t>& dims) {
  auto need = [&](std::size_t k) {
    if (dims.size() != k) {
      throw ValidationError("flop_count: '" + std::string(component) + "' takes " + std::to_string(k) + " dims, got " +
                            std::to_string(dims.size()));
    }
  };
  const auto u = [&](std::size_t i) { return static_cast<std::uint64_t>(dims[i]); };
  if (component == "dense") return need(2), u(0) * u(1);
  if (component == "lstm_step") return need(2), 4 * u(0) * (u(1) + u(0));
  if (component == "attention") return need(2), u(0) * u(1);
  if (component == "soft_index") return need(2), u(0) * u(1);
  if (component == "gate_mix") return need(1), 2 * u(0);
  if (component == "interpolation") return need(2), 2 * u(0) * u(1);
  throw ValidationError("flop_count: unknown component '" + std::string(component) +
                        "' (valid: dense, lstm_step, attention, soft_index, gate_mix, interpolation)");
}

namespace {

struct LedgerBuilder {
  CostLedger ledger;
  void dense(Component c, std::uint64_t rows, std::size_t out, std::size_t in) {
    ledger.add(c, rows * flop_count("dense", {out, in}), rows * out);
  }
  void macs(Component c, std::uint64_t count) { ledger.add(c, count); }
  void encoder(std::uint64_t rows, const ModelDims& d, std::size_t in) {
    std::size_t width = in;
    for (std::size_t i = 0; i <= d.encoder_layers; ++i) {
      const std::size_t out = i == d.encoder_layers ? d.half_dim() : d.encoder_hidden;
      dense(Component::kEncoders, rows, out, width);
      width = out;
    }
  }
  void student_pairs(std::uint64_t rows, const ModelDims& d, Modality m) {
    if (m != Modality::kAudioOnly) encoder(rows, d, d.image_dim);
    if (m != Modality::kImageOnly) encoder(rows, d, d.audio_dim);
    fusion(rows, d);
    dense(Component::kClassifier, rows, d.num_classes, d.feature_dim);
  }
  void fusion(std::uint64_t rows, const ModelDims& d) {
    dense(Component::kFusion, rows, d.feature_dim, d.feature_dim);
    dense(Component::kFusion, rows, d.feature_dim, d.feature_dim);
  }
  void lstm(std::uint64_t steps, const ModelDims& d) {
    ledger.add(Component::kLstm, steps * flop_count("lstm_step", {d.lstm_hidden, d.feature_dim}), steps * 4 * d.lstm_hidden);
  }
};

}  // namespace

CostLedger analytic_cost(Strategy strategy, const ModelDims& d, Modality modality, std::size_t n,
                         const skim::InferenceBudget& budget) {
  LedgerBuilder b;
  const bool img = modality != Modality::kAudioOnly, aud = modality != Modality::kImageOnly;
  const std::uint64_t streams = (img ? 1 : 0) + (aud ? 1 : 0);
  const std::size_t h = d.half_dim();
  switch (strategy) {
    case Strategy::kRandom:
    case Strategy::kUniform:
    case Strategy::kFront:
    case Strategy::kCenter:
    case Strategy::kEnd:
      b.student_pairs(std::min(kSelectCount, n), d, modality);
      break;
    case Strategy::kDense:
    case Strategy::kScSampler:
      b.student_pairs(n, d, modality);
      break;
    case Strategy::kLstm:
      if (img) b.encoder(n, d, d.image_dim);
      if (aud) b.encoder(n, d, d.audio_dim);
      b.fusion(n, d);
      b.lstm(n, d);
      b.dense(Component::kClassifier, 1, d.num_classes, d.lstm_hidden);
      break;
    case Strategy::kNonRecurrent: {
      const std::size_t k = std::min(kSelectCount, n);
      if (img) b.encoder(n, d, d.image_dim);
      if (aud) b.encoder(n, d, d.audio_dim);
      b.macs(Component::kQueryKeyGate, streams * n * flop_count("dense", {d.key_dim, h}));
      b.macs(Component::kAttention, streams * flop_count("soft_index", {n, h}));
      b.fusion(1, d);
      b.lstm(1, d);
      b.dense(Component::kQueryKeyGate, streams, d.query_hidden, d.lstm_hidden);
      b.dense(Component::kQueryKeyGate, streams, d.key_dim, d.query_hidden);
      if (img && aud) b.dense(Component::kQueryKeyGate, 1, 2, d.lstm_hidden);
      b.macs(Component::kAttention, streams * flop_count("attention", {n, d.key_dim}));
      if (img && aud) b.macs(Component::kAttention, flop_count("gate_mix", {n}));
      b.fusion(k, d);
      b.dense(Component::kClassifier, k, d.num_classes, d.feature_dim);
      break;
    }
    case Strategy::kOurs: {
      const std::size_t f = budget.subsample_factor, t_stop = budget.t_stop;
      const bool recog = budget.use_recognition_features;
      const std::size_t kept = skim::kept_count(n, f);
      if (img) b.encoder(kept, d, d.image_dim);
      if (aud) b.encoder(kept, d, d.audio_dim);
      if (f > 1) {
        std::size_t interpolated = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j % f != 0 && j / f + 1 < kept) ++interpolated;
        }
        b.macs(Component::kInterpolation, streams * flop_count("interpolation", {interpolated, h}));
      }
      if (recog) {
        b.dense(Component::kTeacher, n, d.teacher_hidden, d.clip_dim() + d.audio_dim);
        b.dense(Component::kTeacher, n, d.feature_dim, d.teacher_hidden);
        b.dense(Component::kTeacher, n, d.num_classes, d.feature_dim);
      }
      b.macs(Component::kQueryKeyGate, streams * n * flop_count("dense", {d.key_dim, h}));
      b.macs(Component::kAttention, streams * flop_count("soft_index", {n, h}));
      if (recog) b.macs(Component::kAttention, flop_count("soft_index", {n, d.feature_dim}));
      for (std::size_t t = 1; t <= t_stop; ++t) {
        const bool last = t == t_stop;
        if (!(recog && last)) b.fusion(1, d);
        if (last) break;
        b.lstm(1, d);
        b.dense(Component::kQueryKeyGate, streams, d.query_hidden, d.lstm_hidden);
        b.dense(Component::kQueryKeyGate, streams, d.key_dim, d.query_hidden);
        if (img && aud) b.dense(Component::kQueryKeyGate, 1, 2, d.lstm_hidden);
        b.macs(Component::kAttention, streams * flop_count("attention", {n, d.key_dim}));
        auto mix = [&](std::size_t width) {
          if (img && aud) {
            b.macs(Component::kAttention, 2 * flop_count("soft_index", {n, width}) + flop_count("gate_mix", {width}));
          } else {
            b.macs(Component::kAttention, flop_count("soft_index", {n, width}));
          }
        };
        for (std::uint64_t s = 0; s < streams; ++s) mix(h);
        if (recog) mix(d.feature_dim);
      }
      b.dense(Component::kClassifier, 1, d.num_classes, d.feature_dim);
      break;
    }
  }
  return b.ledger;
}

// ---------------------------------------------------------------- evaluation

EvalReport evaluate(Strategy strategy, const std::vector<synth::SyntheticVideo>& videos, const ModelSet& models,
                    const EvalOptions& options) {
  if (videos.empty()) throw Error(ErrorCategory::kEvaluation, "evaluate: empty dataset");
  if (options.seeds.empty()) throw ValidationError("evaluate: at least one seed is required");
  options.budget.validate();
  EvalReport report;
  report.strategy = std::string(strategy_name(strategy));
  report.videos = videos.size();
  report.seeds = options.seeds;
  report.budget = options.budget;
  const std::size_t classes = models.student ? models.student->dims().num_classes : 0;
  double recall_sum = 0.0;
  std::size_t recall_count = 0;

  for (std::size_t si = 0; si < options.seeds.size(); ++si) {
    std::vector<StrategyOutput> outs(videos.size());
    parallel_for(videos.size(), [&](std::size_t i) {
      outs[i] = run_strategy(strategy, videos[i], models, options.budget, options.seeds[si], i);
    });
    std::size_t correct = 0;
    std::vector<std::size_t> class_hits(classes), class_total(classes);
    for (std::size_t i = 0; i < videos.size(); ++i) {
      const auto p = outs[i].probs.values();
      const std::size_t pred = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
      const std::uint32_t label = videos[i].label;
      const bool hit = pred == label;
      correct += hit ? 1 : 0;
      if (label < classes) {
        ++class_total[label];
        class_hits[label] += hit ? 1 : 0;
      }
      if (has_selection(strategy) && !outs[i].selected.empty()) {
        recall_sum += selection_recall(outs[i].selected, videos[i].key_mask);
        ++recall_count;
      }
      if (outs[i].warning &&
          std::find(report.warnings.begin(), report.warnings.end(), *outs[i].warning) == report.warnings.end()) {
        report.warnings.push_back(*outs[i].warning);
      }
      if (si == 0 && i == 0) report.cost = outs[i].cost;
      if (!(outs[i].cost == report.cost)) {
        throw Error(ErrorCategory::kEvaluation, "evaluate: per-video cost differs between videos");
      }
    }
    report.seed_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(videos.size()));
    if (si == 0) {
      for (std::size_t k = 0; k < classes; ++k) {
        report.per_class_accuracy.push_back(
            class_total[k] ? static_cast<double>(class_hits[k]) / static_cast<double>(class_total[k]) : 0.0);
      }
    }
  }
  const double s = static_cast<double>(report.seed_accuracy.size());
  report.accuracy = std::accumulate(report.seed_accuracy.begin(), report.seed_accuracy.end(), 0.0) / s;
  double var = 0.0;
  for (double a : report.seed_accuracy) var += (a - report.accuracy) * (a - report.accuracy);
  report.accuracy_std = std::sqrt(var / s);
  if (recall_count > 0) report.recall = recall_sum / static_cast<double>(recall_count);
  return report;
}

namespace {

nlohmann::json ledger_json(const CostLedger& l) {
  nlohmann::json comps = nlohmann::json::object();
  for (std::size_t i = 0; i < numerics::kNumComponents; ++i) {
    comps[std::string(numerics::component_name(static_cast<Component>(i)))] = l.macs[i];
  }
  return {{"total_macs", l.total_macs()}, {"bias_adds", l.total_bias_adds()}, {"components", comps}};
}

}  // namespace

std::string report_to_json(const EvalReport& r, const std::optional<CostLedger>& reference) {
  nlohmann::json j;
  j["strategy"] = r.strategy;
  j["accuracy"] = r.accuracy;
  j["accuracy_std"] = r.accuracy_std;
  j["seed_accuracy"] = r.seed_accuracy;
  j["per_class_accuracy"] = r.per_class_accuracy;
  j["recall"] = r.recall ? nlohmann::json(*r.recall) : nlohmann::json(nullptr);
  j["cost"] = ledger_json(r.cost);
  if (reference && reference->total_macs() > 0) {
    j["ratio_vs_dense"] = static_cast<double>(r.cost.total_macs()) / static_cast<double>(reference->total_macs());
  }
  j["videos"] = r.videos;
  j["seeds"] = r.seeds;
  j["budget"] = {{"t_stop", r.budget.t_stop},
                 {"subsample_factor", r.budget.subsample_factor},
                 {"use_recognition_features", r.budget.use_recognition_features}};
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

namespace {

const EvalReport* find_dense(const std::vector<EvalReport>& reports) {
  for (const auto& r : reports) {
    if (r.strategy == "dense") return &r;
  }
  return nullptr;
}

}  // namespace

std::string reports_to_csv(const std::vector<EvalReport>& reports) {
  const EvalReport* dense = find_dense(reports);
  std::ostringstream out;
  out << "strategy,accuracy,accuracy_std,recall,macs,bias_adds,ratio_vs_dense\n";
  for (const auto& r : reports) {
    out << r.strategy << ',' << format_double(r.accuracy) << ',' << format_double(r.accuracy_std) << ','
        << (r.recall ? format_double(*r.recall) : "") << ',' << r.cost.total_macs() << ',' << r.cost.total_bias_adds()
        << ',';
    if (dense && dense->cost.total_macs() > 0) {
      out << format_double(static_cast<double>(r.cost.total_macs()) / static_cast<double>(dense->cost.total_macs()));
    }
    out << '\n';
  }
  return out.str();
}

std::string comparison_table(const std::vector<EvalReport>& reports) {
  const EvalReport* dense = find_dense(reports);
  std::ostringstream out;
  out << std::left << std::setw(14) << "strategy" << std::right << std::setw(10) << "accuracy" << std::setw(9)
      << "std" << std::setw(9) << "recall" << std::setw(14) << "MMACs/video" << std::setw(10) << "vs dense" << '\n';
  out << std::string(66, '-') << '\n';
  out << std::fixed;
  for (const auto& r : reports) {
    out << std::left << std::setw(14) << r.strategy << std::right << std::setprecision(2) << std::setw(9)
        << 100.0 * r.accuracy << '%' << std::setw(9) << 100.0 * r.accuracy_std;
    if (r.recall) out << std::setw(9) << std::setprecision(3) << *r.recall;
    else out << std::setw(9) << "-";
    out << std::setw(14) << std::setprecision(3) << static_cast<double>(r.cost.total_macs()) / 1e6;
    if (dense && dense->cost.total_macs() > 0) {
      out << std::setw(10) << std::setprecision(3)
          << static_cast<double>(r.cost.total_macs()) / static_cast<double>(dense->cost.total_macs());
    } else {
      out << std::setw(10) << "-";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace skimnet::evalbench
