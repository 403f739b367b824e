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

#include "skimnet/error.hpp"
#include "skimnet/models/checkpoint.hpp"
#include "skimnet/models/lstm.hpp"
#include "skimnet/models/skimmer.hpp"
#include "skimnet/models/student.hpp"
#include "skimnet/models/teacher.hpp"
#include "test_util.hpp"

namespace skimnet::models {
namespace {

using testing::random_tensor;

ModelDims small_dims() {
  ModelDims d;
  d.image_dim = 5;
  d.audio_dim = 4;
  d.clip_frames = 3;
  d.num_classes = 4;
  d.feature_dim = 8;
  d.encoder_hidden = 7;
  d.teacher_hidden = 9;
  d.lstm_hidden = 6;
  d.key_dim = 5;
  d.query_hidden = 4;
  return d;
}

double row_sum(const Tensor& t, std::size_t r) {
  double s = 0.0;
  for (std::size_t c = 0; c < t.cols(); ++c) s += t.at(r, c);
  return s;
}

TEST(Teacher, SameSeedSameModel) {
  const ModelDims d = small_dims();
  Teacher a(d, 3), b(d, 3), c(d, 4);
  EXPECT_TRUE(a.params() == b.params());
  EXPECT_FALSE(a.params() == c.params());
  Rng rng = make_rng(1, "t");
  const Tensor clip = random_tensor(rng, {6, d.clip_dim()});
  const Tensor audio = random_tensor(rng, {6, d.audio_dim});
  EXPECT_EQ(a.forward(clip, audio).probs, b.forward(clip, audio).probs);
}

TEST(Teacher, ProbabilitiesFormDistributions) {
  const ModelDims d = small_dims();
  Teacher t(d, 1);
  Rng rng = make_rng(2, "t");
  const auto out = t.forward(random_tensor(rng, {10, d.clip_dim()}, 3.0), random_tensor(rng, {10, d.audio_dim}, 3.0));
  ASSERT_EQ(out.probs.shape(), (numerics::Shape{10, d.num_classes}));
  ASSERT_EQ(out.z.shape(), (numerics::Shape{10, d.feature_dim}));
  for (std::size_t r = 0; r < 10; ++r) {
    EXPECT_NEAR(row_sum(out.probs, r), 1.0, 1e-12);
    for (std::size_t c = 0; c < d.num_classes; ++c) EXPECT_GT(out.probs.at(r, c), 0.0);
  }
}

TEST(Teacher, ZeroWeightsGiveUniform) {
  const ModelDims d = small_dims();
  Teacher t(d, 1);
  for (auto* p : t.params().params()) p->value.fill(0.0);
  Rng rng = make_rng(3, "t");
  const auto out = t.forward(random_tensor(rng, {d.clip_dim()}), random_tensor(rng, {d.audio_dim}));
  ASSERT_EQ(out.probs.shape(), (numerics::Shape{d.num_classes}));
  for (double p : out.probs.values()) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(Teacher, RejectsWrongInputWidth) {
  const ModelDims d = small_dims();
  Teacher t(d, 1);
  EXPECT_THROW(t.forward(Tensor({2, d.clip_dim() + 1}), Tensor({2, d.audio_dim})), DimensionError);
  EXPECT_THROW(t.forward(Tensor({2, d.clip_dim()}), Tensor({3, d.audio_dim})), DimensionError);
}

TEST(Student, StreamsAreSeparate) {
  const ModelDims d = small_dims();
  Student s(d, Modality::kImageAudio, 5);
  Rng rng = make_rng(4, "s");
  const Tensor img = random_tensor(rng, {3, d.image_dim});
  const Tensor aud = random_tensor(rng, {3, d.audio_dim});
  const Tensor aud2 = random_tensor(rng, {3, d.audio_dim});
  const Tensor img2 = random_tensor(rng, {3, d.image_dim});
  const auto base = s.forward(img, aud);
  EXPECT_EQ(base.zi.shape(), (numerics::Shape{3, d.half_dim()}));
  EXPECT_EQ(base.fused.shape(), (numerics::Shape{3, d.feature_dim}));
  EXPECT_EQ(s.forward(img, aud2).zi, base.zi);
  EXPECT_NE(s.forward(img, aud2).za, base.za);
  EXPECT_EQ(s.forward(img2, aud).za, base.za);
  EXPECT_NE(s.forward(img2, aud).zi, base.zi);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_NEAR(row_sum(base.probs, r), 1.0, 1e-12);
}

TEST(Student, SingleModalityIgnoresOtherStream) {
  const ModelDims d = small_dims();
  Rng rng = make_rng(5, "s");
  const Tensor img = random_tensor(rng, {2, d.image_dim}), img2 = random_tensor(rng, {2, d.image_dim});
  const Tensor aud = random_tensor(rng, {2, d.audio_dim}), aud2 = random_tensor(rng, {2, d.audio_dim});
  Student image_only(d, Modality::kImageOnly, 5);
  EXPECT_EQ(image_only.forward(img, aud).probs, image_only.forward(img, aud2).probs);
  const Tensor za = image_only.forward(img, aud).za;
  for (double v : za.values()) EXPECT_EQ(v, 0.0);
  Student audio_only(d, Modality::kAudioOnly, 5);
  EXPECT_EQ(audio_only.forward(img, aud).probs, audio_only.forward(img2, aud).probs);
  const Tensor zi = audio_only.forward(img, aud).zi;
  for (double v : zi.values()) EXPECT_EQ(v, 0.0);
}

TEST(Student, FusionFingerprintTracksPsiOnly) {
  const ModelDims d = small_dims();
  Student s(d, Modality::kImageAudio, 5);
  const auto fp = s.fusion_fingerprint();
  s.params().get("student.cls.W").value[0] += 1.0;
  s.params().get("student.img.0.b").value[0] += 1.0;
  EXPECT_EQ(s.fusion_fingerprint(), fp);
  s.params().get("student.psi.1.b").value[0] += 1e-12;
  EXPECT_NE(s.fusion_fingerprint(), fp);
}

TEST(Lstm, ZeroEverythingStaysZero) {
  const LstmState st = lstm_step(Tensor({1, 2}), Tensor({1, 1}), Tensor({1, 1}), Tensor({4, 3}), Tensor({4}));
  EXPECT_EQ(st.h.values()[0], 0.0);
  EXPECT_EQ(st.c.values()[0], 0.0);
}

TEST(Lstm, HalfForgetOfUnitCell) {
  const LstmState st =
      lstm_step(Tensor({1, 2}), Tensor({1, 1}), Tensor::matrix(1, 1, {1.0}), Tensor({4, 3}), Tensor({4}));
  EXPECT_NEAR(st.c.values()[0], 0.5, 1e-15);
  EXPECT_NEAR(st.h.values()[0], 0.5 * std::tanh(0.5), 1e-15);
  EXPECT_NEAR(st.h.values()[0], 0.2311, 1e-4);
}

// Reference cell: gates stacked i, f, g, o over [x | h].
LstmState reference_lstm(const Tensor& x, const Tensor& h, const Tensor& c, const Tensor& w, const Tensor& b) {
  const std::size_t batch = x.rows(), in = x.cols(), hid = h.cols();
  const auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  LstmState out{Tensor({batch, hid}), Tensor({batch, hid})};
  for (std::size_t r = 0; r < batch; ++r) {
    std::vector<double> pre(4 * hid);
    for (std::size_t k = 0; k < 4 * hid; ++k) {
      double s = b[k];
      for (std::size_t j = 0; j < in; ++j) s += w.at(k, j) * x.at(r, j);
      for (std::size_t j = 0; j < hid; ++j) s += w.at(k, in + j) * h.at(r, j);
      pre[k] = s;
    }
    for (std::size_t u = 0; u < hid; ++u) {
      const double i = sig(pre[u]), f = sig(pre[hid + u]), g = std::tanh(pre[2 * hid + u]), o = sig(pre[3 * hid + u]);
      out.c.at(r, u) = f * c.at(r, u) + i * g;
      out.h.at(r, u) = o * std::tanh(out.c.at(r, u));
    }
  }
  return out;
}

TEST(Lstm, MatchesReferenceCell) {
  Rng rng = make_rng(6, "lstm");
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = random_tensor(rng, {3, 5}), h = random_tensor(rng, {3, 4}), c = random_tensor(rng, {3, 4});
    const Tensor w = random_tensor(rng, {16, 9}, 0.7), b = random_tensor(rng, {16}, 0.3);
    const LstmState got = lstm_step(x, h, c, w, b), want = reference_lstm(x, h, c, w, b);
    for (std::size_t i = 0; i < got.h.size(); ++i) {
      EXPECT_NEAR(got.h[i], want.h[i], 1e-14);
      EXPECT_NEAR(got.c[i], want.c[i], 1e-14);
    }
  }
}

TEST(Lstm, RejectsMismatchedWeight) {
  EXPECT_THROW(lstm_step(Tensor({1, 2}), Tensor({1, 3}), Tensor({1, 3}), Tensor({12, 4}), Tensor({12})),
               DimensionError);
}

TEST(Skimmer, ClassifierStartsAsStudentCopy) {
  const ModelDims d = small_dims();
  Student s(d, Modality::kImageAudio, 1);
  Skimmer k(d, s, 2);
  EXPECT_EQ(k.params().get("skim.cls.W").value, s.params().get("student.cls.W").value);
  EXPECT_EQ(k.params().get("skim.cls.b").value, s.params().get("student.cls.b").value);
  EXPECT_TRUE(k.params().contains("skim.ki.W"));
  EXPECT_FALSE(k.params().contains("skim.ki.b"));
  EXPECT_EQ(k.image_key(), "skim.ki");
  ModelDims shared = d;
  shared.shared_key = true;
  Student s2(shared, Modality::kImageAudio, 1);
  Skimmer k2(shared, s2, 2);
  EXPECT_TRUE(k2.params().contains("skim.key.W"));
  EXPECT_EQ(k2.image_key(), k2.audio_key());
}

TEST(Skimmer, FusionIdentityIsEnforced) {
  const ModelDims d = small_dims();
  Student s(d, Modality::kImageAudio, 1);
  Skimmer k(d, s, 2);
  EXPECT_NO_THROW(k.check_fusion());
  EXPECT_NO_THROW(Skimmer(d, s, k.params(), s.fusion_fingerprint()));
  EXPECT_THROW(Skimmer(d, s, k.params(), s.fusion_fingerprint() ^ 1u), ValidationError);
  s.params().get("student.psi.0.W").value[3] += 0.25;
  EXPECT_THROW(k.check_fusion(), ValidationError);
  k.rebind_fusion();
  EXPECT_NO_THROW(k.check_fusion());
}

TEST(Skimmer, RejectsForeignParameters) {
  const ModelDims d = small_dims();
  Student s(d, Modality::kImageAudio, 1);
  ParamStore empty;
  EXPECT_THROW(Skimmer(d, s, empty, s.fusion_fingerprint()), DimensionError);
  ModelDims other = d;
  other.lstm_hidden = 7;
  EXPECT_THROW(Skimmer(other, s, 2), Error);
}

TEST(Checkpoint, RoundTripsAreExact) {
  const ModelDims d = small_dims();
  testing::TempDir dir("ckpt");
  Teacher t(d, 1);
  Student s(d, Modality::kAudioOnly, 2);
  Skimmer k(d, s, 3);
  k.set_trained_steps(7);
  save_teacher(t, dir / "teacher.sknp");
  save_student(s, dir / "student.sknp");
  save_skimmer(k, dir / "skimmer.sknp");
  EXPECT_TRUE(std::filesystem::exists(sidecar_path(dir / "student.sknp")));

  EXPECT_TRUE(load_teacher(dir / "teacher.sknp", d).params() == t.params());
  const Student s2 = load_student(dir / "student.sknp");
  EXPECT_TRUE(s2.params() == s.params());
  EXPECT_EQ(s2.modality(), Modality::kAudioOnly);
  EXPECT_EQ(s2.dims(), d);
  const Skimmer k2 = load_skimmer(dir / "skimmer.sknp", s2);
  EXPECT_TRUE(k2.params() == k.params());
  EXPECT_EQ(k2.trained_steps(), 7u);

  Rng rng = make_rng(7, "ck");
  const Tensor img = random_tensor(rng, {4, d.image_dim}), aud = random_tensor(rng, {4, d.audio_dim});
  EXPECT_EQ(s2.forward(img, aud).probs, s.forward(img, aud).probs);
}

TEST(Checkpoint, ConflictsAndMissingFiles) {
  const ModelDims d = small_dims();
  testing::TempDir dir("ckpt_bad");
  Student s(d, Modality::kImageAudio, 2);
  save_student(s, dir / "student.sknp");
  ModelDims other = d;
  other.encoder_hidden = 11;
  try {
    load_student(dir / "student.sknp", other);
    FAIL() << "expected a conflict";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kDimensionConflict);
  }
  try {
    load_teacher(dir / "student.sknp");
    FAIL() << "expected a kind mismatch";
  } catch (const Error& e) {
    EXPECT_NE(e.category(), ErrorCategory::kDimensionConflict);
  }
  try {
    load_student(dir / "nope.sknp");
    FAIL() << "expected missing file";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kMissingFile);
  }
  // A skimmer trained against one student cannot attach to another.
  Skimmer k(d, s, 3);
  save_skimmer(k, dir / "skimmer.sknp");
  Student other_student(d, Modality::kImageAudio, 9);
  EXPECT_THROW(load_skimmer(dir / "skimmer.sknp", other_student), ValidationError);
}

TEST(Dims, JsonRoundTripAndValidation) {
  ModelDims d = small_dims();
  d.shared_key = true;
  // The architecture section omits data-derived widths; those come from the base.
  ModelDims base;
  base.image_dim = d.image_dim;
  base.audio_dim = d.audio_dim;
  base.clip_frames = d.clip_frames;
  base.num_classes = d.num_classes;
  EXPECT_EQ(model_dims_from_json(model_dims_to_json(d), base), d);
  EXPECT_EQ(model_dims_from_sidecar(model_dims_to_sidecar(d)), d);
  EXPECT_THROW(model_dims_from_json(R"({"feature_dims": 8})"), ConfigError);
  ModelDims odd = d;
  odd.feature_dim = 7;
  EXPECT_THROW(odd.validate(), ConfigError);
  ModelDims zero = d;
  zero.num_classes = 0;
  EXPECT_THROW(zero.validate(), ConfigError);
  for (auto m : {Modality::kImageAudio, Modality::kImageOnly, Modality::kAudioOnly}) {
    EXPECT_EQ(parse_modality(modality_name(m)), m);
  }
  EXPECT_EQ(parse_modality("image"), Modality::kImageOnly);
  EXPECT_THROW(parse_modality("video"), ConfigError);
}

}  // namespace
}  // namespace skimnet::models
