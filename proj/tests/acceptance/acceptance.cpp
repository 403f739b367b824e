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

// End-to-end acceptance run. Prints one "criterion N: PASS|FAIL ..." line per
// criterion and exits nonzero when any fails.
//
//   skimnet_acceptance [--only 1,2,...]
//   skimnet_acceptance --emit-probs <dir>   (child mode used by criterion 10)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "audio_oracle.hpp"
#include "skimnet/cli/commands.hpp"
#include "skimnet/cli/gradcheck_suite.hpp"
#include "skimnet/distill/distill.hpp"
#include "skimnet/evalbench/evalbench.hpp"
#include "skimnet/models/checkpoint.hpp"
#include "skimnet/models/lstm.hpp"
#include "skimnet/numerics/ops.hpp"
#include "skimnet/numerics/param_store.hpp"
#include "skimnet/skim/skim.hpp"
#include "skimnet/synth/audio.hpp"
#include "skimnet/synth/dataset.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace skimnet;
using evalbench::Strategy;
using numerics::Tensor;

namespace {

const fs::path kConfigDir = SKIMNET_CONFIG_DIR;
constexpr std::size_t kSeeds = 5;

using clk = std::chrono::steady_clock;
double seconds_since(clk::time_point t0) { return std::chrono::duration<double>(clk::now() - t0).count(); }

void progress(const std::string& msg) { std::cerr << "[acceptance] " << msg << std::endl; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << std::fixed << v;
  return s.str();
}

std::string list(const std::vector<double>& v, int prec = 3) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt(v[i], prec);
  return out + "]";
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Named sub-checks folded into one criterion line.
class Checklist {
 public:
  void check(const std::string& name, bool ok) {
    ++total_;
    if (!ok) failed_.push_back(name);
  }
  void near(const std::string& name, double got, double want, double tol) {
    check(name, std::isfinite(got) && std::abs(got - want) <= tol);
  }
  Outcome outcome() const {
    Outcome o;
    o.pass = failed_.empty();
    o.detail = std::to_string(total_ - failed_.size()) + "/" + std::to_string(total_) + " checks";
    if (!failed_.empty()) {
      o.detail += "; failed:";
      for (const auto& f : failed_) o.detail += " " + f;
    }
    return o;
  }

 private:
  std::size_t total_ = 0;
  std::vector<std::string> failed_;
};

cli::ExperimentConfig config(const std::string& name, std::uint64_t seed) {
  return cli::resolve_config(kConfigDir / name, seed, std::nullopt);
}

// ---------------------------------------------------------------- criterion 1

struct GradResult {
  Outcome outcome;
  std::map<std::string, bool> module_pass;
};

GradResult criterion_gradcheck() {
  const auto t0 = clk::now();
  const cli::ExperimentConfig cfg = config("default.json", 0);
  GradResult r;
  std::string detail;
  bool ok = true;
  for (const std::string module : {"distill", "skimmer"}) {
    const cli::ModuleCheck c = cli::run_gradcheck(cfg, module);
    const bool pass = c.report.passed && c.report.max_rel_error < 1e-4 && c.report.entries_checked > 0;
    r.module_pass[module] = pass;
    ok = ok && pass;
    detail += module + " max_rel " + fmt(c.report.max_rel_error * 1e6, 3) + "e-6 over " +
              std::to_string(c.report.entries_checked) + " entries; ";
  }
  // The skimmer check must cover every selector parameter group.
  const models::ModelDims dims = cli::probe_dims(cfg);
  const models::Student student(dims, models::Modality::kImageAudio, 0);
  const models::Skimmer skimmer(dims, student, 0);
  const auto names = skimmer.params().names();
  for (const std::string group : {"skim.lstm", "skim.qi.", "skim.qa.", "skim.ki", "skim.ka", "skim.gate"}) {
    const bool present = std::any_of(names.begin(), names.end(), [&](const std::string& n) { return n.rfind(group, 0) == 0; });
    if (!present) {
      ok = false;
      detail += "missing " + group + "; ";
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 120.0;
  detail += fmt(secs, 1) + " s (limit 120)";
  r.outcome = {ok, detail};
  return r;
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion_invariants() {
  Rng rng(derive_seed(2026, "acceptance.invariants"));
  std::uniform_int_distribution<std::size_t> n_dist(1, 40), d_dist(1, 16);
  std::uniform_real_distribution<double> scale_dist(0.1, 6.0), shift_dist(-50.0, 50.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t bad_sum = 0, bad_shift = 0, bad_onehot = 0, bad_gate = 0, bad_hull = 0;
  const std::size_t instances = 1000;
  for (std::size_t it = 0; it < instances; ++it) {
    const std::size_t n = n_dist(rng), d = d_dist(rng), f = d_dist(rng);
    const double sd = scale_dist(rng);
    Tensor keys = testing::random_tensor(rng, {n, d}, sd);
    const Tensor q = testing::random_tensor(rng, {d}, sd);
    const Tensor feats = testing::random_tensor(rng, {n, f}, sd);

    const Tensor w = skim::attention_weights(keys, q);
    double sum = 0.0;
    bool nonneg = true;
    for (double v : w.values()) sum += v, nonneg = nonneg && v >= 0.0;
    if (!nonneg || std::abs(sum - 1.0) > 1e-9) ++bad_sum;

    // Adding the same vector to every key moves every score by the same amount.
    const Tensor offset = testing::random_tensor(rng, {d}, sd);
    Tensor shifted_keys = keys;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < d; ++k) shifted_keys.at(j, k) += offset[k];
    }
    const Tensor w_shift = skim::attention_weights(shifted_keys, q);
    Tensor scores({n});
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < d; ++k) scores[j] += keys.at(j, k) * q[k];
    }
    Tensor scores_shift = scores;
    const double c = shift_dist(rng);
    for (double& v : scores_shift.values()) v += c;
    if (numerics::max_abs_diff(w, w_shift) > 1e-9 ||
        numerics::max_abs_diff(numerics::softmax(scores), numerics::softmax(scores_shift)) > 1e-9) {
      ++bad_shift;
    }

    const std::size_t hot = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    Tensor onehot({n});
    onehot[hot] = 1.0;
    if (!(skim::soft_index(onehot, feats) == feats.row_block(hot, hot + 1).reshaped({f}))) ++bad_onehot;

    // Soft-indexed features stay inside the bounding box of the rows.
    const Tensor z = skim::soft_index(w, feats);
    for (std::size_t k = 0; k < f; ++k) {
      double lo = feats.at(0, k), hi = lo;
      for (std::size_t j = 1; j < n; ++j) lo = std::min(lo, feats.at(j, k)), hi = std::max(hi, feats.at(j, k));
      if (z[k] < lo - 1e-9 || z[k] > hi + 1e-9) {
        ++bad_hull;
        break;
      }
    }

    // Gate mixing: weights sum to one and the result lies on the segment.
    const Tensor s = numerics::softmax(Tensor::vector({sd * normal(rng), sd * normal(rng)}));
    const Tensor a = testing::random_tensor(rng, {f}, sd), b = testing::random_tensor(rng, {f}, sd);
    const Tensor m = skim::gate_mix(s[0], s[1], a, b);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < f; ++k) num += (m[k] - b[k]) * (a[k] - b[k]), den += (a[k] - b[k]) * (a[k] - b[k]);
    const double t = den > 0.0 ? num / den : 0.0;
    double resid = 0.0;
    for (std::size_t k = 0; k < f; ++k) resid = std::max(resid, std::abs(m[k] - (b[k] + t * (a[k] - b[k]))));
    if (s[0] < 0.0 || s[1] < 0.0 || std::abs(s[0] + s[1] - 1.0) > 1e-9 || t < -1e-9 || t > 1.0 + 1e-9 ||
        resid > 1e-9) {
      ++bad_gate;
    }
  }

  // The same invariants on the gates and weights of full skimmer forwards.
  std::size_t bad_model = 0;
  const std::size_t models_checked = 100;
  for (std::size_t it = 0; it < models_checked; ++it) {
    models::ModelDims dims;
    dims.num_classes = 3;
    dims.feature_dim = 6;
    dims.encoder_hidden = 5;
    dims.teacher_hidden = 5;
    dims.lstm_hidden = 4;
    dims.key_dim = 3;
    dims.query_hidden = 4;
    const models::Student student(dims, models::Modality::kImageAudio, it);
    const models::Skimmer skimmer(dims, student, it);
    const std::size_t n = n_dist(rng);
    skim::FeatureSequence fs_in;
    fs_in.image = testing::random_tensor(rng, {n, dims.half_dim()}, 2.0);
    fs_in.audio = testing::random_tensor(rng, {n, dims.half_dim()}, 2.0);
    const skim::SkimResult r = skim::skim_forward(fs_in, skimmer, 5);
    bool ok = r.trace.steps.size() == 4;
    for (const auto& st : r.trace.steps) {
      ok = ok && st.s_image >= 0.0 && st.s_audio >= 0.0 && std::abs(st.s_image + st.s_audio - 1.0) <= 1e-9;
      for (const auto* wv : {&st.w_image, &st.w_audio}) {
        double sum = 0.0;
        for (double v : *wv) ok = ok && v >= 0.0, sum += v;
        ok = ok && std::abs(sum - 1.0) <= 1e-9;
      }
    }
    double psum = 0.0;
    for (double v : r.probs.values()) psum += v;
    ok = ok && std::abs(psum - 1.0) <= 1e-9;
    bad_model += !ok;
  }

  const std::size_t bad = bad_sum + bad_shift + bad_onehot + bad_gate + bad_hull + bad_model;
  std::string detail = std::to_string(instances) + " instances + " + std::to_string(models_checked) +
                       " skimmer forwards; violations: sum " + std::to_string(bad_sum) + ", shift " +
                       std::to_string(bad_shift) + ", one-hot " + std::to_string(bad_onehot) + ", gate " +
                       std::to_string(bad_gate) + ", hull " + std::to_string(bad_hull) + ", model " +
                       std::to_string(bad_model);
  return {bad == 0, detail};
}

// ------------------------------------------------------ criteria 4 through 8

struct PipelineResults {
  // criterion 4
  std::vector<double> acc_ia, acc_image, acc_audio;
  // criterion 5
  std::vector<double> acc_ours_l4, acc_uniform_l4, recall_ours_l4, recall_uniform_l4;
  // criteria 6 to 8, seed 0 at the defaults
  double acc_f1 = 0, acc_f5 = 0, acc_t3 = 0, acc_t10 = 0;
  double ratio = 0;
  bool analytic_matches = false;
  std::string ledger_detail;
  // extra oracles on the trained checkpoint
  bool dense_matches_loop = false;
  bool dense_is_n_pairs = false;
};

evalbench::EvalReport eval_test(Strategy s, const synth::Dataset& ds, const evalbench::ModelSet& m,
                                skim::InferenceBudget budget = {}) {
  evalbench::EvalOptions opt;
  opt.budget = budget;
  opt.seeds = {0};
  return evalbench::evaluate(s, ds.test, m, opt);
}

void run_default_seed(std::uint64_t seed, PipelineResults& out) {
  const auto t0 = clk::now();
  cli::ExperimentConfig cfg = config("default.json", seed);
  const synth::Dataset ds = synth::gen_dataset(cfg.dataset);
  const models::Teacher teacher = distill::train_teacher(cfg.model, ds, cfg.distill);
  std::optional<models::Student> ia;
  for (auto mod : {models::Modality::kImageAudio, models::Modality::kImageOnly, models::Modality::kAudioOnly}) {
    distill::DistillConfig dc = cfg.distill;
    dc.modality = mod;
    distill::DistillResult r = distill::train_distill(ds, teacher, cfg.model, dc);
    const double acc = r.log.back().val_acc;
    if (mod == models::Modality::kImageAudio) {
      out.acc_ia.push_back(acc);
      ia.emplace(std::move(r.student));
    } else {
      (mod == models::Modality::kImageOnly ? out.acc_image : out.acc_audio).push_back(acc);
    }
  }
  progress("default seed " + std::to_string(seed) + ": students ia/image/audio " + fmt(out.acc_ia.back(), 3) + "/" +
           fmt(out.acc_image.back(), 3) + "/" + fmt(out.acc_audio.back(), 3) + " (" + fmt(seconds_since(t0), 1) +
           " s)");
  if (seed != 0) return;

  const skim::SkimTrainResult sr = skim::train_skim(ds, *ia, cfg.model, cfg.skim);
  const evalbench::ModelSet m{&*ia, &sr.skimmer, nullptr, &teacher};
  const auto acc = [&](std::size_t t_stop, std::size_t factor) {
    return eval_test(Strategy::kOurs, ds, m, {t_stop, factor, false});
  };
  const evalbench::EvalReport f1 = acc(10, 1), f5 = acc(10, 5), t3 = acc(3, 1);
  out.acc_f1 = out.acc_t10 = f1.accuracy;
  out.acc_f5 = f5.accuracy;
  out.acc_t3 = t3.accuracy;

  const skim::InferenceBudget sparse{10, 5, false};
  const evalbench::EvalReport dense = eval_test(Strategy::kDense, ds, m, sparse);
  const std::size_t n = cfg.dataset.seq_len;
  const auto mod = models::Modality::kImageAudio;
  const numerics::CostLedger a_ours = evalbench::analytic_cost(Strategy::kOurs, cfg.model, mod, n, sparse);
  const numerics::CostLedger a_dense = evalbench::analytic_cost(Strategy::kDense, cfg.model, mod, n, sparse);
  out.ratio = static_cast<double>(a_ours.total_macs()) / static_cast<double>(a_dense.total_macs());
  out.analytic_matches = a_ours == f5.cost && a_dense == dense.cost;
  out.ledger_detail = "ours " + std::to_string(a_ours.total_macs()) + " / dense " +
                      std::to_string(a_dense.total_macs()) + " MACs";

  // Dense against a direct loop over time stamps, and its ledger against N
  // separately metered student pairs.
  const synth::SyntheticVideo& v = ds.test.front();
  const evalbench::StrategyOutput so = evalbench::run_strategy(Strategy::kDense, v, m, sparse);
  Tensor loop({cfg.model.num_classes});
  numerics::CostLedger pairs;
  for (std::size_t j = 0; j < n; ++j) {
    numerics::CostMeter meter;
    const auto o = ia->forward(v.image_feats.row_block(j, j + 1), v.audio_feats.row_block(j, j + 1));
    for (std::size_t c = 0; c < loop.size(); ++c) loop[c] += o.probs[c] / static_cast<double>(n);
    pairs += meter.ledger();
  }
  out.dense_matches_loop = numerics::max_abs_diff(so.probs, loop) <= 1e-9;
  out.dense_is_n_pairs = pairs.total_macs() == so.cost.total_macs() && pairs.total_macs() == a_dense.total_macs();
  progress("default seed 0 skimmer: f1 " + fmt(out.acc_f1, 3) + " f5 " + fmt(out.acc_f5, 3) + " t3 " +
           fmt(out.acc_t3, 3) + " (" + fmt(seconds_since(t0), 1) + " s)");
}

void run_sparse_seed(std::uint64_t seed, PipelineResults& out) {
  const auto t0 = clk::now();
  cli::ExperimentConfig cfg = config("sparse_action.json", seed);
  const synth::Dataset ds = synth::gen_dataset(cfg.dataset);
  const models::Teacher teacher = distill::train_teacher(cfg.model, ds, cfg.distill);
  distill::DistillResult dr = distill::train_distill(ds, teacher, cfg.model, cfg.distill);
  const skim::SkimTrainResult sr = skim::train_skim(ds, dr.student, cfg.model, cfg.skim);
  const evalbench::ModelSet m{&dr.student, &sr.skimmer, nullptr, &teacher};
  const evalbench::EvalReport ours = eval_test(Strategy::kOurs, ds, m);
  const evalbench::EvalReport uni = eval_test(Strategy::kUniform, ds, m);
  out.acc_ours_l4.push_back(ours.accuracy);
  out.acc_uniform_l4.push_back(uni.accuracy);
  out.recall_ours_l4.push_back(ours.recall.value_or(0.0));
  out.recall_uniform_l4.push_back(uni.recall.value_or(0.0));
  progress("sparse seed " + std::to_string(seed) + ": ours " + fmt(ours.accuracy, 3) + " uniform " +
           fmt(uni.accuracy, 3) + " (" + fmt(seconds_since(t0), 1) + " s)");
}

Outcome criterion_multimodal(const PipelineResults& r) {
  const double ia = median(r.acc_ia), im = median(r.acc_image), au = median(r.acc_audio);
  const bool ok = ia - im >= 0.10 && ia - au >= 0.10;
  return {ok, "median val acc image_audio " + fmt(ia, 3) + ", image " + fmt(im, 3) + ", audio " + fmt(au, 3) +
                  " (need gaps >= 0.100); per seed ia " + list(r.acc_ia) + " image " + list(r.acc_image) +
                  " audio " + list(r.acc_audio)};
}

Outcome criterion_sparse(const PipelineResults& r) {
  const double ours = median(r.acc_ours_l4), uni = median(r.acc_uniform_l4);
  std::size_t recall_wins = 0;
  for (std::size_t i = 0; i < r.recall_ours_l4.size(); ++i) recall_wins += r.recall_ours_l4[i] > r.recall_uniform_l4[i];
  const bool ok = ours - uni >= 0.05 && recall_wins >= 4;
  return {ok, "median acc skimmer " + fmt(ours, 3) + " vs uniform " + fmt(uni, 3) + " (need gap >= 0.050); recall wins " +
                  std::to_string(recall_wins) + "/" + std::to_string(r.recall_ours_l4.size()) + ", recall skimmer " +
                  list(r.recall_ours_l4) + " uniform " + list(r.recall_uniform_l4)};
}

Outcome criterion_subsample(const PipelineResults& r) {
  const double drop = r.acc_f1 - r.acc_f5;
  return {drop <= 0.02, "factor 1 " + fmt(r.acc_f1, 3) + ", factor 5 " + fmt(r.acc_f5, 3) + ", drop " +
                            fmt(drop * 100, 1) + " points (limit 2)"};
}

Outcome criterion_early_stop(const PipelineResults& r) {
  const double gap = std::abs(r.acc_t10 - r.acc_t3);
  return {gap <= 0.01 + 1e-12, "t_stop 10 " + fmt(r.acc_t10, 3) + ", t_stop 3 " + fmt(r.acc_t3, 3) + ", gap " +
                                   fmt(gap * 100, 1) + " points (limit 1)"};
}

Outcome criterion_cost(const PipelineResults& r) {
  const bool ok = r.ratio >= 0.15 && r.ratio <= 0.30 && r.analytic_matches;
  return {ok, "ratio " + fmt(r.ratio, 4) + " (" + r.ledger_detail + "), analytic == instrumented: " +
                  (r.analytic_matches ? "yes" : "no")};
}

// ---------------------------------------------------------------- criterion 3

Outcome criterion_oracles(const GradResult& grad, const std::map<std::string, bool>& full_grad,
                          const PipelineResults& pr, const Outcome& c5, const Outcome& c6, const Outcome& c7,
                          const Outcome& c8) {
  Checklist cl;
  // Affine layer and softmax by hand.
  {
    const Tensor y = numerics::affine_apply(Tensor::vector({1, 1}), Tensor::matrix(2, 2, {1, 2, 0, 1}),
                                            Tensor::vector({1, 0}));
    cl.near("affine[0]", y[0], 4.0, 1e-9);
    cl.near("affine[1]", y[1], 1.0, 1e-9);
    const Tensor p = numerics::softmax(Tensor::vector({0.0, std::log(3.0)}));
    cl.near("softmax[0]", p[0], 0.25, 1e-9);
    cl.near("softmax[1]", p[1], 0.75, 1e-9);
  }
  // Noiseless, fully keyed videos are classified perfectly by the nearest prototype.
  {
    synth::DatasetConfig cfg;
    cfg.visual_snr = std::numeric_limits<double>::infinity();
    cfg.key_len = cfg.seq_len;
    cfg.videos_per_class = 20;
    const synth::Dataset d = synth::gen_dataset(cfg);
    const synth::Prototypes protos = synth::make_prototypes(cfg);
    std::size_t correct = 0;
    for (const auto& v : d.test) {
      std::vector<double> mean(cfg.image_dim, 0.0);
      for (std::size_t j = 0; j < cfg.seq_len; ++j) {
        for (std::size_t k = 0; k < cfg.image_dim; ++k) mean[k] += v.image_feats.at(j, k) / cfg.seq_len;
      }
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < cfg.num_classes; ++c) {
        double dist = 0.0;
        for (std::size_t k = 0; k < cfg.image_dim; ++k) dist += std::pow(mean[k] - protos.image.at(c, k), 2);
        if (dist < best_d) best_d = dist, best = c;
      }
      correct += best == v.label;
    }
    cl.check("nearest_prototype", correct == d.test.size());
  }
  // Spectrogram: a centred sine peaks in its band; frame counts.
  {
    const int sr = 16000;
    for (std::size_t band : {10u, 25u}) {
      const synth::PcmAudio a = testing::tone(sr, 1.0, synth::mel_band_center_hz(sr, 40, band));
      const synth::Spectrogram s = synth::wav_to_spectrogram(a);
      const auto oracle = testing::dft_band_energies(a, 40);
      std::size_t peak = 0;
      double worst = 0.0;
      for (std::size_t f = 0; f < s.frames() && f < oracle.size(); ++f) {
        std::size_t arg = 0;
        for (std::size_t b = 0; b < 40; ++b) {
          worst = std::max(worst, std::abs(s.values.at(f, b) - std::log(1e-10 + oracle[f][b])));
          if (oracle[f][b] > oracle[f][arg]) arg = b;
        }
        peak += arg == band;
      }
      cl.check("sine_frames_" + std::to_string(band), s.frames() == oracle.size());
      cl.check("sine_dft_" + std::to_string(band), worst <= 1e-9);
      cl.check("sine_peak_" + std::to_string(band), static_cast<double>(peak) >= 0.95 * static_cast<double>(s.frames()));
    }
    const synth::PcmAudio two = testing::tone(sr, 2.0, 300.0);
    cl.check("frames_2s", synth::wav_to_spectrogram(two).frames() == 1 + two.samples.size() * 100 / sr &&
                              synth::wav_to_spectrogram(two).frames() == 201);
  }
  // LSTM cell by hand.
  {
    const auto st = models::lstm_step(Tensor::vector({0.0}), Tensor::vector({0.0}), Tensor::vector({1.0}),
                                      Tensor({4, 2}), Tensor({4}));
    cl.near("lstm_c", st.c[0], 0.5, 1e-9);
    cl.near("lstm_h", st.h[0], 0.5 * std::tanh(0.5), 1e-9);
    cl.near("lstm_h_rounded", st.h[0], 0.2311, 5e-5);
  }
  // Distillation terms by hand.
  {
    const Tensor u = Tensor::vector({0.25, 0.25, 0.25, 0.25});
    cl.near("kl_uniform", distill::kl_soft_target_loss(u, u), std::log(4.0), 1e-9);
    cl.near("kl_onehot", distill::kl_soft_target_loss(Tensor::vector({0, 1, 0, 0}), Tensor::vector({0.2, 0.5, 0.1, 0.2})),
            std::log(2.0), 1e-9);
    cl.near("l1", distill::l1_feature_loss(Tensor::vector({1, 2}), Tensor::vector({0, 0})), 3.0, 1e-9);
    const distill::LossTerms t = distill::distill_loss(
        Tensor::vector({1, 2}), Tensor::vector({1, 0}), Tensor::vector({0, 0}), Tensor::vector({0.5, 0.5}), 100.0);
    cl.near("combined", t.total, 3.0 + 100.0 * std::log(2.0), 1e-9);
    cl.near("combined_rounded", t.total, 72.31, 5e-3);
  }
  // Selector primitives by hand.
  {
    const Tensor w = skim::attention_weights(Tensor::matrix(2, 1, {0.0, std::log(3.0)}), Tensor::vector({1.0}));
    cl.near("attention[0]", w[0], 0.25, 1e-9);
    cl.near("attention[1]", w[1], 0.75, 1e-9);
    const Tensor keys = Tensor::matrix(3, 1, {0.0, 1.0, 0.2});
    const Tensor sat = skim::attention_weights(keys, Tensor::vector({40.0}));  // score gap 32
    cl.check("saturation", numerics::max_abs_diff(sat, Tensor::vector({0, 1, 0})) <= 1e-9);
    const Tensor z = skim::soft_index(Tensor::vector({0.25, 0.75}), Tensor::matrix(2, 2, {0, 0, 4, 8}));
    cl.near("soft_index[0]", z[0], 3.0, 1e-9);
    cl.near("soft_index[1]", z[1], 6.0, 1e-9);
    cl.near("gate_mix", skim::gate_mix(0.5, 0.5, Tensor::vector({2}), Tensor::vector({4}))[0], 3.0, 1e-9);
  }
  // Interpolation reconstructs affine sequences at every kept span.
  {
    Rng rng(derive_seed(2026, "acceptance.interp"));
    bool ok = true;
    for (std::size_t factor = 1; factor <= 8; ++factor) {
      for (std::size_t n : {std::size_t{64}, std::size_t{61}, std::size_t{33}}) {
        const Tensor a = testing::random_tensor(rng, {5}), b = testing::random_tensor(rng, {5});
        const std::size_t kept = skim::kept_count(n, factor);
        Tensor sparse({kept, 5});
        for (std::size_t r = 0; r < kept; ++r) {
          for (std::size_t k = 0; k < 5; ++k) sparse.at(r, k) = a[k] + b[k] * static_cast<double>(r * factor);
        }
        const Tensor full = skim::interpolate_features(sparse, factor, n);
        const std::size_t last = (kept - 1) * factor;
        for (std::size_t j = 0; j <= last; ++j) {
          for (std::size_t k = 0; k < 5; ++k) {
            ok = ok && std::abs(full.at(j, k) - (a[k] + b[k] * static_cast<double>(j))) <= 1e-12 * (1 + std::abs(full.at(j, k)));
          }
        }
      }
    }
    cl.check("affine_interpolation", ok);
  }
  // Baselines and recall.
  {
    std::vector<std::size_t> want;
    for (std::size_t j = 0; j < 10; ++j) want.push_back(static_cast<std::size_t>(std::llround(j * 63.0 / 9.0)));
    cl.check("uniform_indices", evalbench::uniform_indices(64, 10) == want &&
                                    evalbench::uniform_indices(64, 10) == evalbench::uniform_indices(64, 10));
    std::vector<std::uint8_t> mask(64, 0);
    for (std::size_t j = 20; j < 24; ++j) mask[j] = 1;
    cl.near("recall", evalbench::selection_recall({0, 5, 10, 21, 23, 30, 40, 50, 60, 63}, mask), 0.5, 1e-9);
    cl.check("dense_loop", pr.dense_matches_loop);
    cl.check("dense_ledger", pr.dense_is_n_pairs);
  }
  // Gradient checks: distillation and unrolled skim (criterion 1) plus every module.
  cl.check("fd_distill", grad.module_pass.at("distill"));
  cl.check("fd_skimmer", grad.module_pass.at("skimmer"));
  for (const auto& [module, pass] : full_grad) cl.check("fd_" + module, pass);
  // Single-run image-audio vs image-only gap on the default dataset, seed 0.
  cl.check("ia_vs_image_seed0", !pr.acc_ia.empty() && pr.acc_ia[0] - pr.acc_image[0] >= 0.10);
  cl.check("skim_vs_uniform", c5.pass);
  cl.check("subsample_factor5", c6.pass);
  cl.check("t_stop3", c7.pass);
  cl.check("cost_ratio", c8.pass);
  return cl.outcome();
}

// ---------------------------------------------------------------- criterion 9

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = testing::read_file(e.path());
  }
  return files;
}

Outcome criterion_determinism() {
  testing::TempDir dir("acceptance_rerun");
  const std::string cfg = (kConfigDir / "tiny.json").string();
  const std::string out = (dir / "run").string();
  const std::vector<std::vector<std::string>> commands = {
      {"gen"}, {"distill"}, {"train-skim"}, {"eval"}, {"sweep", "--axis", "t_stop"},
      {"sweep", "--axis", "subsample_factor"}, {"gradcheck", "--module", "distill"}};
  const auto run_all = [&]() {
    fs::remove_all(out);
    for (const auto& c : commands) {
      std::vector<std::string> args = {"skimnet"};
      args.insert(args.end(), c.begin(), c.end());
      for (const std::string& a : {std::string("--config"), cfg, std::string("--seed"), std::string("7"),
                                   std::string("--out"), out}) {
        args.push_back(a);
      }
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream o, e;
      if (cli::run_cli(static_cast<int>(argv.size()), argv.data(), o, e) != 0) {
        throw std::runtime_error(c[0] + " failed: " + e.str());
      }
    }
    return snapshot(out);
  };
  const auto first = run_all();
  const auto second = run_all();
  std::size_t reports = 0;
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : first) {
    const std::string ext = fs::path(name).extension().string();
    reports += ext == ".csv" || ext == ".json" || ext == ".jsonl";
    const auto it = second.find(name);
    if (it == second.end() || it->second != bytes) differing.push_back(name);
  }
  const bool ok = differing.empty() && first.size() == second.size() && reports > 0;
  std::string detail = std::to_string(first.size()) + " files (" + std::to_string(reports) +
                       " CSV/JSON) compared over two runs of gen, distill, train-skim, eval, sweep x2, gradcheck";
  for (const auto& d : differing) detail += "; differs: " + d;
  return {ok, detail};
}

// --------------------------------------------------------------- criterion 10

std::vector<Tensor> checkpoint_probs(const models::Student& student, const models::Skimmer& skimmer,
                                     const std::vector<synth::SyntheticVideo>& videos) {
  std::vector<Tensor> out;
  const evalbench::ModelSet m{&student, &skimmer, nullptr, nullptr};
  for (const auto& v : videos) {
    out.push_back(evalbench::run_strategy(Strategy::kOurs, v, m, {}).probs);
    out.push_back(evalbench::run_strategy(Strategy::kDense, v, m, {}).probs);
  }
  return out;
}

int emit_probs(const fs::path& dir) {
  const models::Student student = models::load_student(dir / "student.sknp");
  const models::Skimmer skimmer = models::load_skimmer(dir / "skimmer.sknp", student);
  const synth::DatasetSplit split = synth::load_split(dir / "test.sknd");
  for (const Tensor& p : checkpoint_probs(student, skimmer, split.videos)) {
    for (double v : p.values()) std::printf("%a\n", v);
  }
  return 0;
}

std::optional<std::vector<double>> run_child(const fs::path& dir) {
  const std::string cmd = "\"" + fs::read_symlink("/proc/self/exe").string() + "\" --emit-probs \"" + dir.string() + "\"";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return std::nullopt;
  std::vector<double> values;
  char line[128];
  while (std::fgets(line, sizeof line, pipe)) values.push_back(std::strtod(line, nullptr));
  if (pclose(pipe) != 0) return std::nullopt;
  return values;
}

Outcome criterion_round_trip() {
  Checklist cl;
  testing::TempDir dir("acceptance_ckpt");
  const cli::ExperimentConfig cfg = config("tiny.json", 11);
  const synth::Dataset ds = synth::gen_dataset(cfg.dataset);
  const models::Teacher teacher = distill::train_teacher(cfg.model, ds, cfg.distill);
  distill::DistillResult dr = distill::train_distill(ds, teacher, cfg.model, cfg.distill);
  const skim::SkimTrainResult sr = skim::train_skim(ds, dr.student, cfg.model, cfg.skim);

  // ParamStore container.
  for (const numerics::ParamStore* store :
       std::vector<const numerics::ParamStore*>{&teacher.params(), &dr.student.params(), &sr.skimmer.params()}) {
    numerics::save_params(*store, dir / "p.sknp");
    const numerics::ParamStore back = numerics::load_params(dir / "p.sknp");
    numerics::save_params(back, dir / "q.sknp");
    cl.check("params_equal", back == *store && back.fingerprint() == store->fingerprint());
    cl.check("params_bytes", testing::read_file(dir / "p.sknp") == testing::read_file(dir / "q.sknp"));
  }
  // Dataset container.
  for (const auto* split : {&ds.train, &ds.val, &ds.test}) {
    synth::save_split(dir / "d.sknd", cfg.dataset, *split);
    const synth::DatasetSplit back = synth::load_split(dir / "d.sknd");
    synth::save_split(dir / "e.sknd", cfg.dataset, back.videos);
    cl.check("dataset_equal", back.videos == *split &&
                                  synth::dataset_config_from_json(back.config_json) == cfg.dataset);
    cl.check("dataset_bytes", testing::read_file(dir / "d.sknd") == testing::read_file(dir / "e.sknd"));
  }
  // Checkpoints reloaded by a separate process.
  models::save_student(dr.student, dir / "student.sknp");
  models::save_skimmer(sr.skimmer, dir / "skimmer.sknp");
  synth::save_split(dir / "test.sknd", cfg.dataset, ds.test);
  std::vector<double> here;
  for (const Tensor& p : checkpoint_probs(dr.student, sr.skimmer, ds.test)) here.insert(here.end(), p.values().begin(), p.values().end());
  const auto child = run_child(dir.path());
  double worst = std::numeric_limits<double>::infinity();
  if (child && child->size() == here.size()) {
    worst = 0.0;
    for (std::size_t i = 0; i < here.size(); ++i) worst = std::max(worst, std::abs(here[i] - (*child)[i]));
  }
  cl.check("fresh_process_probs", worst <= 1e-12);
  Outcome o = cl.outcome();
  o.detail += ", fresh-process max |dp| " + (std::isfinite(worst) ? fmt(worst * 1e12, 3) + "e-12" : "n/a") + " over " +
              std::to_string(here.size()) + " probabilities";
  return o;
}

std::set<int> parse_only(const std::string& s) {
  std::set<int> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) out.insert(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 3 && std::string(argv[1]) == "--emit-probs") {
    try {
      return emit_probs(argv[2]);
    } catch (const std::exception& e) {
      std::cerr << e.what() << '\n';
      return 1;
    }
  }
  std::set<int> only;
  if (argc == 3 && std::string(argv[1]) == "--only") only = parse_only(argv[2]);
  const auto want = [&](std::initializer_list<int> ids) {
    if (only.empty()) return true;
    return std::any_of(ids.begin(), ids.end(), [&](int i) { return only.count(i) > 0; });
  };

  const auto start = clk::now();
  std::map<int, Outcome> results;
  const auto guarded = [&](int id, const std::function<Outcome()>& fn) {
    const auto t0 = clk::now();
    try {
      results[id] = fn();
    } catch (const std::exception& e) {
      results[id] = {false, std::string("exception: ") + e.what()};
    }
    progress("criterion " + std::to_string(id) + " done in " + fmt(seconds_since(t0), 1) + " s");
  };

  GradResult grad;
  std::map<std::string, bool> full_grad;
  if (want({1, 3})) {
    guarded(1, [&] {
      grad = criterion_gradcheck();
      return grad.outcome;
    });
  }
  if (want({2})) guarded(2, criterion_invariants);

  PipelineResults pr;
  bool pipeline_ok = true;
  if (want({3, 4, 5, 6, 7, 8})) {
    try {
      for (std::uint64_t s = 0; s < kSeeds; ++s) run_default_seed(s, pr);
      for (std::uint64_t s = 0; s < kSeeds; ++s) run_sparse_seed(s, pr);
    } catch (const std::exception& e) {
      pipeline_ok = false;
      for (int id : {4, 5, 6, 7, 8}) results[id] = {false, std::string("exception: ") + e.what()};
    }
    if (pipeline_ok) {
      results[4] = criterion_multimodal(pr);
      results[5] = criterion_sparse(pr);
      results[6] = criterion_subsample(pr);
      results[7] = criterion_early_stop(pr);
      results[8] = criterion_cost(pr);
    }
  }
  if (want({3})) {
    guarded(3, [&] {
      const cli::ExperimentConfig cfg = config("default.json", 0);
      for (const auto& c : cli::run_gradchecks(cfg)) full_grad[c.module] = c.report.passed;
      if (!pipeline_ok) return Outcome{false, "pipeline failed"};
      return criterion_oracles(grad, full_grad, pr, results[5], results[6], results[7], results[8]);
    });
  }
  if (want({9})) guarded(9, criterion_determinism);
  if (want({10})) guarded(10, criterion_round_trip);

  bool all = true;
  for (int id = 1; id <= 10; ++id) {
    const auto it = results.find(id);
    if (it == results.end()) continue;
    all = all && it->second.pass;
    std::cout << "criterion " << id << ": " << (it->second.pass ? "PASS" : "FAIL") << "  " << it->second.detail
              << std::endl;
  }
  std::cout << "total " << fmt(seconds_since(start), 1) << " s" << std::endl;
  return all ? 0 : 1;
}
