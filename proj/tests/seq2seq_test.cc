// Copyright 2026 The compact-slt Authors. All Rights Reserved.
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

#include "slt/seq2seq.h"

#include <gtest/gtest.h>

#include "reference_model.h"
#include "slt/attention.h"
#include "slt/error.h"
#include "slt/loss.h"

namespace slt {
namespace {

using testing::random_frames;
using testing::random_model;
using testing::tiny_config;

TEST(ProjectPose, ZeroWeightsGiveZero) {
  ModelConfig c = tiny_config();
  auto p = allocate_params<double>(c);
  const Mat<double> x = random_frames<double>(3, 1);
  EXPECT_TRUE(project_pose(p, x).isZero(0.0));
}

TEST(ProjectPose, BasisVectorThroughIdentity) {
  ModelConfig c = tiny_config();
  c.d_model = 256;
  auto p = allocate_params<double>(c);
  for (int i = 0; i < 255; ++i) p.proj_w(i, i) = 1.0;
  Mat<double> x = Mat<double>::Zero(1, 255);
  x(0, 0) = 1.0;
  const Mat<double> y = project_pose(p, x);
  EXPECT_EQ(y(0, 0), 1.0);
  EXPECT_EQ(y.sum(), 1.0);
}

TEST(ProjectPose, ToyMatvec) {
  // W = [[1,0,1],[0,2,0]] acting on x = [1,2,3] with bias [0.5,-0.5]; the
  // stored weight is its transpose (inputs along rows).
  ModelParams<double> p;
  p.proj_w = Mat<double>(3, 2);
  p.proj_w << 1, 0, 0, 2, 1, 0;
  p.proj_b = Mat<double>(1, 2);
  p.proj_b << 0.5, -0.5;
  Mat<double> x(1, 3);
  x << 1, 2, 3;
  const Mat<double> y = project_pose(p, x);
  EXPECT_DOUBLE_EQ(y(0, 0), 4.5);
  EXPECT_DOUBLE_EQ(y(0, 1), 3.5);
}

TEST(ProjectPose, WrongWidthIsShapeError) {
  auto p = allocate_params<double>(tiny_config());
  Mat<double> x = Mat<double>::Zero(2, 254);
  try {
    project_pose(p, x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShape);
  }
}

TEST(ParamsAudit, ShapesFollowConfig) {
  for (auto ffn : {FfnVariant::kRelu, FfnVariant::kGatedGelu}) {
    for (bool tied : {true, false}) {
      ModelConfig c = tiny_config(11, ffn, tied);
      c.num_layers = 2;
      auto p = allocate_params<float>(c);
      const auto inv = tensor_inventory(p);
      const int ffn_mats = ffn == FfnVariant::kRelu ? 2 : 3;
      const std::size_t expected = 3 + (tied ? 0 : 1) + 2 + 2 +
                                   2 * (2 + 4 + ffn_mats) + 2 * (3 + 8 + ffn_mats);
      EXPECT_EQ(inv.size(), expected);
      for (const auto& t : inv) {
        if (t.rank == 1) {
          EXPECT_EQ(t.rows, 1) << t.name;
        }
      }
    }
  }
}

TEST(InitParams, RelativeBiasIsALocalityPrior) {
  ModelConfig c;
  c.d_model = 64;
  c.num_heads = 4;
  c.d_kv = 16;
  c.num_layers = 1;
  const auto p = init_params<float>(c, 5);
  EXPECT_EQ(p.enc_rel_bias, init_params<float>(c, 6).enc_rel_bias);
  for (bool bidirectional : {true, false}) {
    const Mat<float>& t = bidirectional ? p.enc_rel_bias : p.dec_rel_bias;
    for (int h = 0; h < c.num_heads; ++h) {
      float prev = 1.0f;
      for (long d = 0; d <= 200; ++d) {
        const float v = t(relative_bucket(-d, bidirectional), h);
        if (d == 0) {
          EXPECT_EQ(v, 0.0f);
        }
        EXPECT_LE(v, prev) << "head " << h << " distance " << d;
        prev = v;
        if (bidirectional) {
          EXPECT_EQ(v, t(relative_bucket(d, true), h));
        }
      }
      // Earlier heads are more local.
      if (h > 0) {
        EXPECT_LT(t(relative_bucket(-20, bidirectional), h - 1),
                  t(relative_bucket(-20, bidirectional), h));
      }
    }
  }
}

TEST(Encode, OutputShapes) {
  ModelConfig c = tiny_config();
  auto p = random_model<float>(c, 3);
  for (int n : {1, 17, 256}) {
    const auto enc = encode(p, random_frames<float>(n, n));
    EXPECT_EQ(enc.states.rows(), n);
    EXPECT_EQ(enc.states.cols(), c.d_model);
  }
}

TEST(Encode, RejectsEmptyAndOversizedInput) {
  ModelConfig c = tiny_config();
  auto p = random_model<float>(c, 3);
  try {
    encode(p, Mat<float>(0, 255));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
  try {
    encode(p, random_frames<float>(257, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShape);
  }
}

TEST(Encode, DeterministicAndPositionSensitive) {
  ModelConfig c = tiny_config();
  auto p = random_model<double>(c, 4);
  const Mat<double> frames = random_frames<double>(6, 9);
  const auto a = encode(p, frames);
  const auto b = encode(p, frames);
  EXPECT_TRUE(a.states == b.states);

  Mat<double> swapped = frames;
  swapped.row(0) = frames.row(5);
  swapped.row(5) = frames.row(0);
  const auto s = encode(p, swapped);
  // A pure permutation would just swap rows 0 and 5 if the model ignored
  // position; the bias table makes the outputs differ beyond that.
  EXPECT_GT((s.states.row(0) - a.states.row(5)).norm(), 1e-6);
}

TEST(DecodeStep, MatchesLoopOracle) {
  for (auto ffn : {FfnVariant::kRelu, FfnVariant::kGatedGelu}) {
    for (bool tied : {true, false}) {
      ModelConfig c = tiny_config(5, ffn, tied);
      c.d_model = 4;
      c.d_kv = 2;
      c.d_ff = 6;
      auto p = random_model<double>(c, 21);
      const Mat<double> frames = random_frames<double>(7, 5);
      const auto enc = encode(p, frames);
      const std::vector<TokenId> prefix{3, 4, 2};
      for (std::size_t len = 0; len <= prefix.size(); ++len) {
        std::vector<TokenId> pre(prefix.begin(), prefix.begin() + len);
        const RowVec<double> got = decode_step(p, pre, enc);
        const auto want = testing::reference_step_logits(p, testing::to_grid(frames), pre);
        ASSERT_EQ(got.size(), c.vocab_size);
        for (int v = 0; v < c.vocab_size; ++v) EXPECT_NEAR(got(v), want[v], 1e-12);
      }
    }
  }
}

TEST(DecodeStep, CausalUnderPrefixExtension) {
  ModelConfig c = tiny_config();
  auto p = random_model<float>(c, 5);
  const auto enc = encode(p, random_frames<float>(9, 2));
  const std::vector<TokenId> ab{4, 7};
  const std::vector<TokenId> abc{4, 7, 9};
  const RowVec<float> step = decode_step(p, ab, enc);
  const Mat<float> full = decoder_logits(p, std::vector<TokenId>{kPadId, 4, 7, 9}, enc);
  EXPECT_TRUE(step == full.row(2)) << "logits for position 2 changed";
}

TEST(TeacherForced, RowsEqualRepeatedDecodeSteps) {
  ModelConfig c = tiny_config();
  auto p = random_model<float>(c, 6);
  const Mat<float> frames = random_frames<float>(8, 3);
  const std::vector<TokenId> targets{5, 3, 8, kEosId};
  const Mat<float> rows = forward_teacher_forced(p, frames, targets);
  const auto enc = encode(p, frames);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const RowVec<float> step =
        decode_step(p, std::span<const TokenId>(targets.data(), t), enc);
    EXPECT_TRUE(step == rows.row(static_cast<long>(t))) << "row " << t;
  }
  const Mat<float> single = forward_teacher_forced(p, frames, std::vector<TokenId>{kEosId});
  EXPECT_EQ(single.rows(), 1);
}

struct GradCase {
  FfnVariant ffn;
  bool tied;
};

class GradientCheck : public ::testing::TestWithParam<GradCase> {};

TEST_P(GradientCheck, MatchesCentralDifferences) {
  ModelConfig c = tiny_config(11, GetParam().ffn, GetParam().tied);
  auto params = random_model<double>(c, 77, 0.3);
  const Mat<double> frames = random_frames<double>(12, 8);
  const std::vector<TokenId> targets{4, 9, 3, 10, kEosId};
  auto loss = [&](const ModelParams<double>& p) {
    TrainingPass<double> pass;
    const Mat<double> logits = pass.forward(p, frames, targets, nullptr);
    return label_smoothed_loss(logits, targets, 0.1);
  };
  TrainingPass<double> pass;
  const Mat<double> logits = pass.forward(params, frames, targets, nullptr);
  auto terms = label_smoothed_loss_terms(logits, targets, 0.1);
  auto grads = zeros_like(params);
  pass.backward(params, terms.grad / static_cast<double>(terms.count), grads);
  std::string worst;
  const double err = testing::max_gradient_error(params, grads, loss, 1e-6, &worst);
  EXPECT_LT(err, 1e-5) << "worst tensor " << worst;
}

INSTANTIATE_TEST_SUITE_P(Variants, GradientCheck,
                         ::testing::Values(GradCase{FfnVariant::kRelu, true},
                                           GradCase{FfnVariant::kRelu, false},
                                           GradCase{FfnVariant::kGatedGelu, true},
                                           GradCase{FfnVariant::kGatedGelu, false}),
                         [](const ::testing::TestParamInfo<GradCase>& info) {
                           return std::string(info.param.ffn == FfnVariant::kRelu ? "Relu" : "GatedGelu") +
                                  (info.param.tied ? "Tied" : "Untied");
                         });

TEST(TrainingPass, DropoutOffMatchesInference) {
  ModelConfig c = tiny_config();
  c.dropout = 0.1;
  auto p = random_model<float>(c, 8);
  const Mat<float> frames = random_frames<float>(5, 1);
  const std::vector<TokenId> targets{3, 4, kEosId};
  TrainingPass<float> pass;
  const Mat<float> train_logits = pass.forward(p, frames, targets, nullptr);
  EXPECT_TRUE(train_logits == forward_teacher_forced(p, frames, targets));
  std::mt19937_64 rng(1);
  const Mat<float> dropped = pass.forward(p, frames, targets, &rng);
  EXPECT_FALSE(dropped == train_logits);
}

}  // namespace
}  // namespace slt
