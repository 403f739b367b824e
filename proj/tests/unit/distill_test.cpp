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

#include <cmath>

#include "skimnet/distill/distill.hpp"
#include "skimnet/error.hpp"
#include "skimnet/models/layers.hpp"
#include "skimnet/numerics/gradcheck.hpp"
#include "skimnet/numerics/ops.hpp"
#include "test_util.hpp"

namespace skimnet::distill {
namespace {

using numerics::Graph;
using testing::random_distribution;
using testing::random_tensor;

Tensor row(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor::matrix(1, n, std::move(v));
}

// Independent scalar reference: mean over rows of sum |a - b| and -sum p log q.
double ref_l1(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.rows());
}
double ref_ce(const Tensor& p, const Tensor& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) s -= p[i] * std::log(q[i]);
  }
  return s / static_cast<double>(p.rows());
}

TEST(SoftTargetLoss, WorkedExamples) {
  EXPECT_NEAR(kl_soft_target_loss(row({.25, .25, .25, .25}), row({.25, .25, .25, .25})), std::log(4.0), 1e-12);
  EXPECT_NEAR(kl_soft_target_loss(row({1, 0}), row({.5, .5})), std::log(2.0), 1e-12);
  EXPECT_NEAR(kl_soft_target_loss(row({0, 1, 0}), row({0, 1, 0})), 0.0, 1e-12);
}

TEST(SoftTargetLoss, GibbsInequalityAndNonNegativity) {
  Rng rng = make_rng(1, "gibbs");
  for (int i = 0; i < 100; ++i) {
    const std::size_t c = 2 + static_cast<std::size_t>(i % 9);
    const Tensor p = random_distribution(rng, c).reshaped({1, c});
    const Tensor q = random_distribution(rng, c).reshaped({1, c});
    const double cross = kl_soft_target_loss(p, q), self = kl_soft_target_loss(p, p);
    EXPECT_GE(cross, self - 1e-12);
    EXPECT_GE(self, 0.0);
    EXPECT_NEAR(cross, ref_ce(p, q), 1e-12);
  }
}

TEST(SoftTargetLoss, RejectsNonDistributions) {
  EXPECT_THROW(kl_soft_target_loss(row({.5, .6}), row({.5, .5})), ValidationError);
  EXPECT_THROW(kl_soft_target_loss(row({1.5, -.5}), row({.5, .5})), ValidationError);
  EXPECT_THROW(kl_soft_target_loss(row({.5, .5}), row({.2, .3, .5})), DimensionError);
}

TEST(FeatureLoss, WorkedExamples) {
  EXPECT_DOUBLE_EQ(l1_feature_loss(row({1, 2}), row({0, 0})), 3.0);
  EXPECT_DOUBLE_EQ(l1_feature_loss(row({0, 0}), row({1, 2})), 3.0);
  EXPECT_DOUBLE_EQ(l1_feature_loss(row({1, -2}), row({1, -2})), 0.0);
  // Averaged over the batch.
  EXPECT_DOUBLE_EQ(l1_feature_loss(Tensor::matrix(2, 2, {1, 2, 3, 0}), Tensor({2, 2})), 3.0);
  EXPECT_THROW(l1_feature_loss(row({1, 2}), row({1, 2, 3})), DimensionError);
}

TEST(FeatureLoss, SymmetricAgainstReference) {
  Rng rng = make_rng(2, "l1");
  for (int i = 0; i < 50; ++i) {
    const Tensor a = random_tensor(rng, {3, 8}), b = random_tensor(rng, {3, 8});
    EXPECT_EQ(l1_feature_loss(a, b), l1_feature_loss(b, a));
    EXPECT_NEAR(l1_feature_loss(a, b), ref_l1(a, b), 1e-12);
  }
}

TEST(DistillLoss, CombinesTerms) {
  const LossTerms t = distill_loss(row({1, 2}), row({1, 0}), row({0, 0}), row({.5, .5}), 100.0);
  EXPECT_DOUBLE_EQ(t.l1, 3.0);
  EXPECT_NEAR(t.kl, std::log(2.0), 1e-12);
  EXPECT_NEAR(t.total, 3.0 + 100.0 * std::log(2.0), 1e-10);
  EXPECT_NEAR(t.total, 72.31, 5e-3);

  Rng rng = make_rng(3, "dl");
  const Tensor z = random_tensor(rng, {1, 6}), f = random_tensor(rng, {1, 6});
  const Tensor p = random_distribution(rng, 5).reshaped({1, 5}), q = random_distribution(rng, 5).reshaped({1, 5});
  EXPECT_DOUBLE_EQ(distill_loss(z, p, f, q, 0.0).total, l1_feature_loss(z, f));
  // A student matching the teacher exactly pays lambda times the teacher entropy.
  EXPECT_NEAR(distill_loss(z, p, z, p, 7.0).total, 7.0 * ref_ce(p, p), 1e-12);
}

TEST(DistillLoss, GraphFormMatchesTensorForm) {
  Rng rng = make_rng(4, "dl");
  const Tensor z = random_tensor(rng, {4, 6}), f = random_tensor(rng, {4, 6}), logits = random_tensor(rng, {4, 5});
  Tensor p({4, 5});
  for (std::size_t r = 0; r < 4; ++r) {
    const Tensor d = random_distribution(rng, 5);
    for (std::size_t c = 0; c < 5; ++c) p.at(r, c) = d[c];
  }
  Graph g(false);
  const Tensor q = numerics::softmax_rows(g.constant(logits)).value();
  const LossVars v = distill_loss(g.constant(f), g.constant(logits), z, p, 100.0);
  const LossTerms t = distill_loss(z, p, f, q, 100.0);
  EXPECT_NEAR(v.l1.value()[0], t.l1, 1e-12);
  EXPECT_NEAR(v.kl.value()[0], t.kl, 1e-12);
  EXPECT_NEAR(v.total.value()[0], t.total, 1e-10);
  // Temperature divides the logits.
  const LossVars hot = distill_loss(g.constant(f), g.constant(logits), z, p, 100.0, 2.0);
  const Tensor q2 = numerics::softmax_rows(numerics::scale(g.constant(logits), 0.5)).value();
  EXPECT_NEAR(hot.kl.value()[0], ref_ce(p, q2), 1e-12);
}

TEST(DistillLoss, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng = make_rng(seed, "dl.fd");
    const Tensor z = random_tensor(rng, {3, 6});
    Tensor p({3, 4});
    for (std::size_t r = 0; r < 3; ++r) {
      const Tensor d = random_distribution(rng, 4);
      for (std::size_t c = 0; c < 4; ++c) p.at(r, c) = d[c];
    }
    numerics::ParamStore store;
    store.add("fused", random_tensor(rng, {3, 6}));
    store.add("logits", random_tensor(rng, {3, 4}));
    auto loss = [&](Graph& g) {
      models::Binder bind(g, true);
      return distill_loss(bind(store.get("fused")), bind(store.get("logits")), z, p, 100.0).total;
    };
    const auto report = numerics::finite_diff_check(loss, store, 1e-5, 1e-4);
    EXPECT_TRUE(report.passed) << "seed " << seed << " rel " << report.max_rel_error;
  }
}

synth::Dataset tiny_data() {
  synth::DatasetConfig cfg;
  cfg.num_classes = 3;
  cfg.videos_per_class = 10;
  cfg.seq_len = 12;
  cfg.key_len = 4;
  cfg.visual_snr = 3.0;
  cfg.audio_snr = 3.0;
  cfg.seed = 9;
  return synth::gen_dataset(cfg);
}

models::ModelDims tiny_dims() {
  models::ModelDims d;
  d.num_classes = 3;
  d.feature_dim = 16;
  d.encoder_hidden = 24;
  d.teacher_hidden = 24;
  d.lstm_hidden = 8;
  d.key_dim = 8;
  d.query_hidden = 8;
  return d;
}

TEST(TrainDistill, ZeroEpochsLeavesStudentAtInit) {
  const auto data = tiny_data();
  const auto dims = tiny_dims();
  const models::Teacher teacher(dims, 1);
  DistillConfig cfg;
  cfg.epochs = 0;
  cfg.finetune_epochs = 0;
  cfg.seed = 4;
  const DistillResult r = train_distill(data, teacher, dims, cfg);
  const Student fresh(dims, cfg.modality, derive_seed(cfg.seed, "student"));
  EXPECT_TRUE(r.student.params() == fresh.params());
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].epoch, 0u);
}

TEST(TrainDistill, FeatureLossDecreasesAndRunsAreReproducible) {
  const auto data = tiny_data();
  const auto dims = tiny_dims();
  DistillConfig cfg;
  cfg.teacher_epochs = 3;
  cfg.epochs = 4;
  cfg.batch_size = 32;
  cfg.seed = 2;
  const models::Teacher teacher = train_teacher(dims, data, cfg);
  EXPECT_GT(teacher_clip_accuracy(teacher, data.val), 1.0 / 3.0);
  const DistillResult a = train_distill(data, teacher, dims, cfg);
  ASSERT_EQ(a.log.size(), 5u);
  EXPECT_LT(a.log.back().l1, a.log.front().l1);
  EXPECT_LT(a.log.back().total, a.log.front().total);
  const DistillResult b = train_distill(data, teacher, dims, cfg);
  EXPECT_TRUE(a.student.params() == b.student.params());
  EXPECT_EQ(distill_log_csv(a.log), distill_log_csv(b.log));
  EXPECT_EQ(distill_log_csv(a.log).substr(0, distill_log_csv(a.log).find('\n')), "epoch,l1,kl,total,val_acc");
}

TEST(TrainDistill, SingleModalityFreezesUnusedEncoder) {
  const auto data = tiny_data();
  const auto dims = tiny_dims();
  const models::Teacher teacher(dims, 1);
  DistillConfig cfg;
  cfg.epochs = 1;
  cfg.modality = models::Modality::kImageOnly;
  const DistillResult r = train_distill(data, teacher, dims, cfg);
  const Student fresh(dims, cfg.modality, derive_seed(cfg.seed, "student"));
  EXPECT_EQ(r.student.params().get("student.aud.0.W").value, fresh.params().get("student.aud.0.W").value);
  EXPECT_NE(r.student.params().get("student.img.0.W").value, fresh.params().get("student.img.0.W").value);
}

TEST(TrainDistill, MismatchedTeacherIsDimensionConflict) {
  const auto data = tiny_data();
  auto other = tiny_dims();
  other.teacher_hidden = 5;
  const models::Teacher teacher(other, 1);
  try {
    train_distill(data, teacher, tiny_dims(), DistillConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kDimensionConflict);
  }
}

TEST(DistillConfigJson, RoundTripAndValidation) {
  DistillConfig cfg;
  cfg.lambda = 3.5;
  cfg.modality = models::Modality::kAudioOnly;
  EXPECT_EQ(distill_config_from_json(distill_config_to_json(cfg)), cfg);
  EXPECT_THROW(distill_config_from_json(R"({"lamda": 1})"), ConfigError);
  DistillConfig bad;
  bad.batch_size = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

}  // namespace
}  // namespace skimnet::distill
