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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <set>

#include "skimnet/error.hpp"
#include "skimnet/evalbench/evalbench.hpp"
#include "test_util.hpp"

namespace skimnet::evalbench {
namespace {

using models::Modality;

models::ModelDims small_dims() {
  models::ModelDims d;
  d.num_classes = 3;
  d.feature_dim = 10;
  d.encoder_hidden = 12;
  d.teacher_hidden = 12;
  d.lstm_hidden = 7;
  d.key_dim = 5;
  d.query_hidden = 6;
  return d;
}

std::vector<synth::SyntheticVideo> videos(std::size_t n, std::size_t key_len = 4, std::uint64_t seed = 2) {
  synth::DatasetConfig cfg;
  cfg.num_classes = 3;
  cfg.videos_per_class = 6;
  cfg.seq_len = n;
  cfg.key_len = key_len;
  cfg.seed = seed;
  auto d = synth::gen_dataset(cfg);
  std::vector<synth::SyntheticVideo> all = d.train;
  all.insert(all.end(), d.test.begin(), d.test.end());
  return all;
}

struct Models {
  models::ModelDims dims;
  models::Student student;
  models::Skimmer skimmer;
  LstmBaseline lstm;
  models::Teacher teacher;

  explicit Models(Modality m = Modality::kImageAudio, models::ModelDims d = small_dims())
      : dims(d), student(d, m, 1), skimmer(d, student, 2), lstm(d, 3), teacher(d, 4) {}

  ModelSet set() const { return {&student, &skimmer, &lstm, &teacher}; }
};

TEST(Selection, UniformIndices) {
  const auto idx = uniform_indices(64, 10);
  ASSERT_EQ(idx.size(), 10u);
  for (std::size_t j = 0; j < 10; ++j) EXPECT_EQ(idx[j], static_cast<std::size_t>(std::lround(j * 63.0 / 9.0)));
  EXPECT_EQ(idx.front(), 0u);
  EXPECT_EQ(idx.back(), 63u);
  EXPECT_EQ(uniform_indices(5, 10), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(uniform_indices(9, 1), (std::vector<std::size_t>{0}));
}

TEST(Selection, TopKBreaksTiesLow) {
  EXPECT_EQ(top_k({.1, .5, .5, .9}, 2), (std::vector<std::size_t>{3, 1}));
  EXPECT_EQ(top_k({1, 1, 1}, 5), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Recall, WorkedExamples) {
  const std::vector<std::uint8_t> mask = {0, 1, 1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(selection_recall({1, 2, 3}, mask), 1.0);
  EXPECT_DOUBLE_EQ(selection_recall({0, 1}, mask), 0.5);
  EXPECT_DOUBLE_EQ(selection_recall({0, 4, 5}, mask), 0.0);
  // More picks than keys: normalised by the key count.
  EXPECT_DOUBLE_EQ(selection_recall({0, 1, 2, 3, 4, 5}, mask), 1.0);
  // Repeats count once.
  EXPECT_DOUBLE_EQ(selection_recall({1, 1, 0}, mask), 0.5);
  EXPECT_THROW(selection_recall({}, mask), ValidationError);
  EXPECT_THROW(selection_recall({9}, mask), ValidationError);
  EXPECT_THROW(selection_recall({0}, {0, 0}), ValidationError);
}

TEST(FlopCount, WorkedExamples) {
  EXPECT_EQ(flop_count("dense", {10, 64}), 640u);
  EXPECT_EQ(flop_count("attention", {64, 64}), 4096u);
  EXPECT_EQ(flop_count("soft_index", {64, 32}), 2048u);
  EXPECT_EQ(flop_count("lstm_step", {128, 64}), 4u * 128 * (64 + 128));
  EXPECT_EQ(flop_count("gate_mix", {64}), 128u);
  EXPECT_THROW(flop_count("conv", {3, 3}), ValidationError);
  EXPECT_THROW(flop_count("dense", {3}), ValidationError);
}

TEST(Strategies, NamesRoundTrip) {
  for (Strategy s : all_strategies()) EXPECT_EQ(parse_strategy(strategy_name(s)), s);
  EXPECT_EQ(all_strategies().size(), 10u);
  EXPECT_THROW(parse_strategy("oracle"), ConfigError);
}

TEST(Strategies, TenStampVideosMakeSelectionsDegenerate) {
  Models m;
  const skim::InferenceBudget budget;
  for (const auto& v : videos(10)) {
    const Tensor dense = run_strategy(Strategy::kDense, v, m.set(), budget).probs;
    for (Strategy s : {Strategy::kRandom, Strategy::kUniform, Strategy::kFront, Strategy::kCenter, Strategy::kEnd}) {
      const auto out = run_strategy(s, v, m.set(), budget, 7, 3);
      EXPECT_EQ(out.probs, dense) << strategy_name(s);
      EXPECT_EQ(out.selected.size(), 10u);
    }
    const Tensor sc = run_strategy(Strategy::kScSampler, v, m.set(), budget).probs;
    for (std::size_t c = 0; c < sc.size(); ++c) EXPECT_NEAR(sc[c], dense[c], 1e-15);
  }
}

TEST(Strategies, DenseIsMeanOfPerStampProbabilities) {
  Models m;
  for (const auto& v : videos(16)) {
    Tensor want({m.dims.num_classes});
    for (std::size_t j = 0; j < v.seq_len(); ++j) {
      Tensor img({v.image_feats.cols()}), aud({v.audio_feats.cols()});
      std::copy_n(v.image_feats.data() + j * img.size(), img.size(), img.data());
      std::copy_n(v.audio_feats.data() + j * aud.size(), aud.size(), aud.data());
      const Tensor p = m.student.forward(img, aud).probs;
      for (std::size_t c = 0; c < p.size(); ++c) want[c] += p[c] / static_cast<double>(v.seq_len());
    }
    const Tensor got = run_strategy(Strategy::kDense, v, m.set(), {}).probs;
    for (std::size_t c = 0; c < want.size(); ++c) EXPECT_NEAR(got[c], want[c], 1e-12);
  }
}

TEST(Strategies, DenseIgnoresTemporalOrder) {
  Models m;
  Rng rng = make_rng(1, "perm");
  for (auto v : videos(16)) {
    const Tensor before = run_strategy(Strategy::kDense, v, m.set(), {}).probs;
    std::vector<std::size_t> perm(v.seq_len());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    synth::SyntheticVideo p = v;
    for (std::size_t j = 0; j < perm.size(); ++j) {
      std::copy_n(v.image_feats.data() + perm[j] * v.image_feats.cols(), v.image_feats.cols(),
                  p.image_feats.data() + j * v.image_feats.cols());
      std::copy_n(v.audio_feats.data() + perm[j] * v.audio_feats.cols(), v.audio_feats.cols(),
                  p.audio_feats.data() + j * v.audio_feats.cols());
    }
    const Tensor after = run_strategy(Strategy::kDense, p, m.set(), {}).probs;
    for (std::size_t c = 0; c < before.size(); ++c) EXPECT_NEAR(after[c], before[c], 1e-12);
  }
}

TEST(Strategies, FixedSelectionsPickTheDocumentedStamps) {
  Models m;
  const auto v = videos(30).front();
  EXPECT_EQ(run_strategy(Strategy::kFront, v, m.set(), {}).selected.front(), 0u);
  EXPECT_EQ(run_strategy(Strategy::kEnd, v, m.set(), {}).selected.back(), 29u);
  EXPECT_EQ(run_strategy(Strategy::kCenter, v, m.set(), {}).selected.front(), 10u);
  EXPECT_EQ(run_strategy(Strategy::kUniform, v, m.set(), {}).selected, uniform_indices(30, 10));
  const auto a = run_strategy(Strategy::kRandom, v, m.set(), {}, 1, 0).selected;
  EXPECT_EQ(a, run_strategy(Strategy::kRandom, v, m.set(), {}, 1, 0).selected);
  EXPECT_NE(a, run_strategy(Strategy::kRandom, v, m.set(), {}, 2, 0).selected);
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 10u);
}

TEST(Strategies, MissingModelsAreValidationErrors) {
  Models m;
  const auto v = videos(12).front();
  ModelSet only_student{&m.student, nullptr, nullptr, nullptr};
  EXPECT_THROW(run_strategy(Strategy::kLstm, v, only_student, {}), ValidationError);
  EXPECT_THROW(run_strategy(Strategy::kOurs, v, only_student, {}), ValidationError);
  EXPECT_THROW(run_strategy(Strategy::kNonRecurrent, v, only_student, {}), ValidationError);
  EXPECT_THROW(run_strategy(Strategy::kDense, v, ModelSet{}, {}), ValidationError);
}

void expect_cost_model_matches(const Models& m, std::size_t n, const skim::InferenceBudget& budget) {
  const auto vids = videos(n, 4, 3);
  for (Strategy s : all_strategies()) {
    if (budget.use_recognition_features && s != Strategy::kOurs) continue;
    const CostLedger measured = run_strategy(s, vids.front(), m.set(), budget).cost;
    const CostLedger predicted = analytic_cost(s, m.dims, m.student.modality(), n, budget);
    EXPECT_EQ(measured.macs, predicted.macs) << strategy_name(s);
    EXPECT_EQ(measured.bias_adds, predicted.bias_adds) << strategy_name(s);
    EXPECT_GT(measured.total_macs(), 0u);
  }
}

TEST(CostModel, AnalyticMatchesInstrumentedDefault) { expect_cost_model_matches(Models(), 24, {6, 1, false}); }

TEST(CostModel, AnalyticMatchesInstrumentedSingleModality) {
  expect_cost_model_matches(Models(Modality::kImageOnly), 17, {4, 1, false});
  expect_cost_model_matches(Models(Modality::kAudioOnly), 17, {4, 1, false});
}

TEST(CostModel, AnalyticMatchesInstrumentedSparse) {
  expect_cost_model_matches(Models(), 23, {5, 4, false});
  expect_cost_model_matches(Models(), 24, {5, 3, false});
}

TEST(CostModel, AnalyticMatchesInstrumentedRecognition) {
  models::ModelDims d = small_dims();
  d.shared_key = true;
  expect_cost_model_matches(Models(Modality::kImageAudio, d), 20, {5, 1, true});
}

TEST(CostModel, SparseSkimmingCostsAFractionOfDense) {
  const models::ModelDims d;
  const auto dense = analytic_cost(Strategy::kDense, d, Modality::kImageAudio, 64, {});
  const auto sparse = analytic_cost(Strategy::kOurs, d, Modality::kImageAudio, 64, {10, 5, false});
  const double ratio = static_cast<double>(sparse.total_macs()) / static_cast<double>(dense.total_macs());
  EXPECT_GE(ratio, 0.15);
  EXPECT_LE(ratio, 0.30);
  // Cost grows with the step budget and shrinks with the subsample factor.
  std::uint64_t prev = 0;
  for (std::size_t t = 1; t <= 10; ++t) {
    const auto c = analytic_cost(Strategy::kOurs, d, Modality::kImageAudio, 64, {t, 1, false}).total_macs();
    EXPECT_GT(c, prev);
    prev = c;
  }
  EXPECT_LT(analytic_cost(Strategy::kOurs, d, Modality::kImageAudio, 64, {10, 2, false}).total_macs(),
            analytic_cost(Strategy::kOurs, d, Modality::kImageAudio, 64, {10, 1, false}).total_macs());
}

TEST(Evaluate, PerfectPredictorScoresOne) {
  Models m;
  // Push the classifier hard towards class 0 and keep only class-0 videos.
  m.student.params().get("student.cls.b").value[0] = 1e3;
  std::vector<synth::SyntheticVideo> zeros;
  for (const auto& v : videos(12)) {
    if (v.label == 0) zeros.push_back(v);
  }
  EvalOptions opt;
  opt.seeds = {0, 1};
  const EvalReport r = evaluate(Strategy::kDense, zeros, m.set(), opt);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.accuracy_std, 0.0);
  EXPECT_EQ(r.per_class_accuracy, (std::vector<double>{1.0, 0.0, 0.0}));
  EXPECT_FALSE(r.recall.has_value());
  EXPECT_EQ(r.videos, zeros.size());
}

TEST(Evaluate, AccuracyMatchesDirectCount) {
  Models m;
  const auto vids = videos(16);
  EvalOptions opt;
  opt.seeds = {0, 1, 2, 3, 4};
  const EvalReport r = evaluate(Strategy::kRandom, vids, m.set(), opt);
  ASSERT_EQ(r.seed_accuracy.size(), 5u);
  double mean = 0.0;
  for (std::size_t si = 0; si < 5; ++si) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < vids.size(); ++i) {
      const auto p = run_strategy(Strategy::kRandom, vids[i], m.set(), opt.budget, opt.seeds[si], i).probs.values();
      hits += static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()) == vids[i].label;
    }
    const double acc = static_cast<double>(hits) / static_cast<double>(vids.size());
    EXPECT_EQ(r.seed_accuracy[si], acc);
    mean += acc / 5.0;
  }
  double var = 0.0;
  for (double a : r.seed_accuracy) var += (a - mean) * (a - mean) / 5.0;
  EXPECT_NEAR(r.accuracy, mean, 1e-15);
  EXPECT_NEAR(r.accuracy_std, std::sqrt(var), 1e-15);
  ASSERT_TRUE(r.recall.has_value());
  EXPECT_GE(*r.recall, 0.0);
  EXPECT_LE(*r.recall, 1.0);
}

TEST(Evaluate, ErrorsAreTyped) {
  Models m;
  EvalOptions opt;
  try {
    evaluate(Strategy::kDense, {}, m.set(), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kEvaluation);
  }
  opt.seeds.clear();
  EXPECT_THROW(evaluate(Strategy::kDense, videos(12), m.set(), opt), ValidationError);
}

TEST(Reports, JsonCsvAndTable) {
  Models m;
  const auto vids = videos(16);
  EvalOptions opt;
  const EvalReport dense = evaluate(Strategy::kDense, vids, m.set(), opt);
  const EvalReport ours = evaluate(Strategy::kOurs, vids, m.set(), opt);
  const auto j = nlohmann::json::parse(report_to_json(ours, dense.cost));
  EXPECT_EQ(j["strategy"], "ours");
  EXPECT_NEAR(j["ratio_vs_dense"].get<double>(),
              static_cast<double>(ours.cost.total_macs()) / static_cast<double>(dense.cost.total_macs()), 1e-15);
  EXPECT_EQ(j["budget"]["t_stop"], 10);
  EXPECT_TRUE(j["recall"].is_number());
  const std::string csv = reports_to_csv({dense, ours});
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(csv.rfind("strategy,accuracy", 0), 0u);
  const std::string table = comparison_table({dense, ours});
  EXPECT_NE(table.find("dense"), std::string::npos);
  EXPECT_NE(table.find("ours"), std::string::npos);
}

TEST(LstmBaseline, TrainsDeterministicallyAndRoundTrips) {
  Models m;
  synth::DatasetConfig cfg;
  cfg.num_classes = 3;
  cfg.videos_per_class = 6;
  cfg.seq_len = 8;
  cfg.key_len = 3;
  const auto data = synth::gen_dataset(cfg);
  LstmBaselineConfig lc;
  lc.epochs = 1;
  lc.batch_size = 4;
  const LstmBaseline a = train_lstm_baseline(data, m.student, lc), b = train_lstm_baseline(data, m.student, lc);
  EXPECT_TRUE(a.params() == b.params());
  EXPECT_FALSE(a.params() == LstmBaseline(m.dims, derive_seed(lc.seed, "lstm_baseline")).params());
  testing::TempDir dir("lstm");
  save_lstm_baseline(a, dir / "lstm.sknp");
  EXPECT_TRUE(load_lstm_baseline(dir / "lstm.sknp", m.dims).params() == a.params());
  models::ModelDims other = m.dims;
  other.lstm_hidden = 3;
  EXPECT_THROW(load_lstm_baseline(dir / "lstm.sknp", other), Error);
}

}  // namespace
}  // namespace skimnet::evalbench
