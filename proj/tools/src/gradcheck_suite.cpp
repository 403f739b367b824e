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

#include "skimnet/cli/gradcheck_suite.hpp"

#include <cmath>
#include <json.hpp>
#include <random>

#include "skimnet/distill/distill.hpp"
#include "skimnet/error.hpp"
#include "skimnet/evalbench/evalbench.hpp"
#include "skimnet/models/skimmer.hpp"
#include "skimnet/numerics/ops.hpp"
#include "skimnet/rng.hpp"
#include "skimnet/skim/skim.hpp"

namespace skimnet::cli {

using models::Binder;
using numerics::Graph;
using numerics::Tensor;
using numerics::Var;

models::ModelDims probe_dims(const ExperimentConfig& cfg) {
  const auto& g = cfg.gradcheck;
  models::ModelDims d = cfg.model;
  d.feature_dim = g.feature_dim;
  d.encoder_hidden = g.encoder_hidden;
  d.teacher_hidden = g.teacher_hidden;
  d.lstm_hidden = g.lstm_hidden;
  d.key_dim = g.key_dim;
  d.query_hidden = g.query_hidden;
  d.num_classes = g.num_classes;
  d.validate();
  return d;
}

namespace {

struct Probe {
  models::ModelDims dims;
  std::size_t n, batch, steps;
  Tensor image, audio, clips;  // [(B*N) x ...]
  Tensor teacher_z, teacher_probs, labels;
  Rng rng;
};

Tensor normal(Rng& rng, std::size_t r, std::size_t c, double sd = 1.0) {
  std::normal_distribution<double> dist(0.0, sd);
  Tensor t({r, c});
  for (double& x : t.values()) x = dist(rng);
  return t;
}

Tensor random_distribution(Rng& rng, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Tensor t({r, c});
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < c; ++k) s += (t.at(i, k) = u(rng));
    for (std::size_t k = 0; k < c; ++k) t.at(i, k) /= s;
  }
  return t;
}

bool is_attention(const std::string& name) {
  for (const char* prefix : {"skim.key.", "skim.ki.", "skim.ka.", "skim.qi.", "skim.qa."}) {
    if (name.starts_with(prefix)) return true;
  }
  return false;
}

void randomize(numerics::ParamStore& store, Probe& p, const GradcheckSection& g) {
  for (auto* param : store.params()) {
    const std::string& name = param->name;
    double sd = g.bias_scale;
    if (name.ends_with(".W")) {
      const double gain = name.find(".lstm.") != std::string::npos ? g.lstm_scale
                          : is_attention(name)                     ? g.attention_scale
                                                                   : g.param_scale;
      sd = gain / std::sqrt(static_cast<double>(param->value.cols()));
    }
    std::normal_distribution<double> dist(0.0, sd);
    for (double& v : param->value.values()) v = dist(p.rng);
  }
}

Probe make_probe(const ExperimentConfig& cfg) {
  const auto& g = cfg.gradcheck;
  Probe p{probe_dims(cfg), g.seq_len, g.batch, g.steps, {}, {}, {}, {}, {}, {}, make_rng(cfg.seed, "gradcheck.inputs")};
  const auto& d = p.dims;
  const std::size_t rows = p.batch * p.n;
  p.image = normal(p.rng, rows, d.image_dim);
  p.audio = normal(p.rng, rows, d.audio_dim);
  p.clips = normal(p.rng, rows, d.clip_dim());
  p.teacher_z = normal(p.rng, rows, d.feature_dim);
  p.teacher_probs = random_distribution(p.rng, rows, d.num_classes);
  p.labels = Tensor({p.batch, d.num_classes});
  for (std::size_t b = 0; b < p.batch; ++b) p.labels.at(b, b % d.num_classes) = 1.0;
  return p;
}

numerics::GradCheckReport check(const ExperimentConfig& cfg, const numerics::LossBuilder& loss,
                                numerics::ParamStore& params) {
  return numerics::finite_diff_check(loss, params, cfg.gradcheck.eps, cfg.gradcheck.tolerance);
}

ModuleCheck check_teacher(const ExperimentConfig& cfg) {
  Probe p = make_probe(cfg);
  models::Teacher teacher(p.dims, derive_seed(cfg.seed, "gradcheck.teacher"));
  randomize(teacher.params(), p, cfg.gradcheck);
  auto loss = [&](Graph& g) {
    Binder bind(g, true);
    auto out = teacher.forward(bind, g.constant(p.clips), g.constant(p.audio));
    return numerics::soft_target_cross_entropy(numerics::softmax_rows(out.logits), p.teacher_probs);
  };
  return {"teacher", check(cfg, loss, teacher.params())};
}

ModuleCheck check_distill(const ExperimentConfig& cfg) {
  Probe p = make_probe(cfg);
  models::Student student(p.dims, cfg.distill.modality, derive_seed(cfg.seed, "gradcheck.student"));
  randomize(student.params(), p, cfg.gradcheck);
  auto loss = [&](Graph& g) {
    Binder bind(g, true);
    auto out = student.forward(bind, g.constant(p.image), g.constant(p.audio));
    return distill::distill_loss(out.fused, out.logits, p.teacher_z, p.teacher_probs, cfg.distill.lambda,
                                 cfg.distill.temperature)
        .total;
  };
  return {"distill", check(cfg, loss, student.params())};
}

numerics::GradCheckReport check_skim_graph(const ExperimentConfig& cfg, bool student_trainable) {
  Probe p = make_probe(cfg);
  models::Student student(p.dims, cfg.distill.modality, derive_seed(cfg.seed, "gradcheck.student"));
  randomize(student.params(), p, cfg.gradcheck);
  models::Skimmer skimmer(p.dims, student, derive_seed(cfg.seed, "gradcheck.skimmer"));
  randomize(skimmer.params(), p, cfg.gradcheck);
  auto loss = [&](Graph& g) {
    Binder skim_bind(g, !student_trainable);
    Binder student_bind(g, student_trainable);
    Var img = g.constant(p.image), aud = g.constant(p.audio);
    Var zi = student.uses_image() ? student.encode_image(student_bind, img) : Var{};
    Var za = student.uses_audio() ? student.encode_audio(student_bind, aud) : Var{};
    skim::FuseFn fuse = [&](Var a, Var b) { return student.fuse(student_bind, a, b); };
    skim::SkimGraph sg = skim::skim_graph(skim_bind, skimmer, fuse, zi, za, Var{}, p.batch, p.n, p.steps);
    return numerics::soft_target_cross_entropy(numerics::softmax_rows(sg.logits), p.labels);
  };
  return check(cfg, loss, student_trainable ? student.params() : skimmer.params());
}

ModuleCheck check_lstm_baseline(const ExperimentConfig& cfg) {
  Probe p = make_probe(cfg);
  evalbench::LstmBaseline model(p.dims, derive_seed(cfg.seed, "gradcheck.lstm_baseline"));
  randomize(model.params(), p, cfg.gradcheck);
  std::vector<Tensor> steps;
  for (std::size_t j = 0; j < p.n; ++j) steps.push_back(normal(p.rng, p.batch, p.dims.feature_dim));
  auto loss = [&](Graph& g) {
    Binder bind(g, true);
    std::vector<Var> inputs;
    for (const auto& s : steps) inputs.push_back(g.constant(s));
    return numerics::soft_target_cross_entropy(numerics::softmax_rows(model.forward(bind, inputs)), p.labels);
  };
  return {"lstm_baseline", check(cfg, loss, model.params())};
}

}  // namespace

const std::vector<std::string>& gradcheck_modules() {
  static const std::vector<std::string> names = {"teacher", "distill", "skimmer", "skim_student", "lstm_baseline"};
  return names;
}

ModuleCheck run_gradcheck(const ExperimentConfig& cfg, const std::string& module) {
  if (module == "teacher") return check_teacher(cfg);
  if (module == "distill") return check_distill(cfg);
  if (module == "skimmer") return {"skimmer", check_skim_graph(cfg, false)};
  if (module == "skim_student") return {"skim_student", check_skim_graph(cfg, true)};
  if (module == "lstm_baseline") return check_lstm_baseline(cfg);
  throw ConfigError("unknown gradcheck module '" + module + "'");
}

std::vector<ModuleCheck> run_gradchecks(const ExperimentConfig& cfg) {
  std::vector<ModuleCheck> out;
  for (const auto& m : gradcheck_modules()) out.push_back(run_gradcheck(cfg, m));
  return out;
}

std::string gradcheck_report_json(const std::vector<ModuleCheck>& checks) {
  nlohmann::json modules = nlohmann::json::array();
  bool all = true;
  for (const auto& c : checks) {
    const auto& r = c.report;
    all = all && r.passed;
    modules.push_back({{"module", c.module},
                       {"passed", r.passed},
                       {"max_rel_error", r.max_rel_error},
                       {"tolerance", r.tolerance},
                       {"entries_checked", r.entries_checked},
                       {"worst_param", r.worst_param},
                       {"worst_index", r.worst_index},
                       {"worst_analytic", r.worst_analytic},
                       {"worst_numeric", r.worst_numeric}});
  }
  return nlohmann::json{{"passed", all}, {"modules", modules}}.dump(2) + "\n";
}

}  // namespace skimnet::cli
