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

#include "slt/loss.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "slt/error.h"

namespace slt {
namespace {

TEST(SmoothedLoss, UniformLogitsGiveLnTwo) {
  Mat<double> logits = Mat<double>::Zero(3, 2);
  const std::vector<TokenId> targets{1, 1, 1};
  for (double eps : {0.0, 0.1, 0.5, 0.9}) {
    EXPECT_NEAR(label_smoothed_loss(logits, targets, eps), std::log(2.0), 1e-12);
  }
}

TEST(SmoothedLoss, HandComputedTwoClass) {
  Mat<double> logits(1, 2);
  logits << 2.0, 0.0;
  const std::vector<TokenId> targets{0};
  // q = [0.95, 0.05]; p0 = 1 / (1 + e^-2).
  const double p0 = 1.0 / (1.0 + std::exp(-2.0));
  const double want = -(0.95 * std::log(p0) + 0.05 * std::log(1.0 - p0));
  EXPECT_NEAR(want, 0.22693, 5e-6);
  // gold 0 is pad-valued, so count it through an explicit mask.
  const std::vector<std::uint8_t> valid{1};
  EXPECT_NEAR(label_smoothed_loss(logits, targets, 0.1, valid), want, 1e-12);
}

TEST(SmoothedLoss, ZeroEpsilonIsCrossEntropy) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 2.0);
  Mat<double> logits(4, 7);
  for (long i = 0; i < logits.size(); ++i) logits.data()[i] = n(rng);
  const std::vector<TokenId> targets{3, 6, 1, 5};
  double want = 0.0;
  for (long t = 0; t < 4; ++t) {
    double z = 0.0;
    for (long v = 0; v < 7; ++v) z += std::exp(logits(t, v));
    want -= logits(t, targets[t]) - std::log(z);
  }
  EXPECT_NEAR(label_smoothed_loss(logits, targets, 0.0), want / 4.0, 1e-12);
}

TEST(SmoothedLoss, PadPositionsAreExcluded) {
  Mat<double> logits(3, 4);
  logits << 1, 2, 3, 4, 9, -9, 0, 0, 0.5, 0.1, -1, 2;
  const std::vector<TokenId> with_pad{3, kPadId, 2};
  Mat<double> kept(2, 4);
  kept << 1, 2, 3, 4, 0.5, 0.1, -1, 2;
  const std::vector<TokenId> without{3, 2};
  EXPECT_NEAR(label_smoothed_loss(logits, with_pad, 0.1),
              label_smoothed_loss(kept, without, 0.1), 1e-14);
  const auto terms = label_smoothed_loss_terms(logits, with_pad, 0.1);
  EXPECT_EQ(terms.count, 2);
  EXPECT_TRUE(terms.grad.row(1).isZero(0.0));
}

TEST(SmoothedLoss, AllPadIsUndefinedMean) {
  Mat<double> logits = Mat<double>::Zero(2, 3);
  const std::vector<TokenId> targets{kPadId, kPadId};
  try {
    label_smoothed_loss(logits, targets, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefinedMean);
  }
}

TEST(SmoothedLoss, BadInputs) {
  Mat<double> logits = Mat<double>::Zero(2, 3);
  EXPECT_THROW(label_smoothed_loss(logits, std::vector<TokenId>{1}, 0.1), Error);
  EXPECT_THROW(label_smoothed_loss(logits, std::vector<TokenId>{1, 7}, 0.1), Error);
  EXPECT_THROW(label_smoothed_loss(logits, std::vector<TokenId>{1, 1}, 1.0), Error);
}

TEST(SmoothedLoss, BoundedBelowByTargetEntropy) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int vocab = 3 + static_cast<int>(rng() % 10);
    const double eps = (rng() % 10) / 10.0;
    const TokenId gold = 1 + static_cast<TokenId>(rng() % (vocab - 1));
    Mat<double> logits(1, vocab);
    for (long i = 0; i < logits.size(); ++i) logits.data()[i] = n(rng);
    const std::vector<TokenId> targets{gold};
    double entropy = 0.0;
    std::vector<double> q(vocab, eps / vocab);
    q[gold] += 1.0 - eps;
    for (double qi : q)
      if (qi > 0) entropy -= qi * std::log(qi);
    EXPECT_GE(label_smoothed_loss(logits, targets, eps), entropy - 1e-12);
    if (eps > 0) {
      Mat<double> exact(1, vocab);
      for (int v = 0; v < vocab; ++v) exact(0, v) = std::log(q[v]);
      EXPECT_NEAR(label_smoothed_loss(exact, targets, eps), entropy, 1e-12);
    }
  }
}

TEST(SmoothedLoss, GradientMatchesFiniteDifference) {
  Mat<double> logits(2, 5);
  logits << 0.3, -1, 2, 0.1, 0.7, 1.5, 0.2, -0.4, 0.9, -2;
  const std::vector<TokenId> targets{2, 4};
  const auto terms = label_smoothed_loss_terms(logits, targets, 0.2);
  for (long i = 0; i < logits.size(); ++i) {
    Mat<double> up = logits, down = logits;
    up.data()[i] += 1e-6;
    down.data()[i] -= 1e-6;
    const double numeric = (label_smoothed_loss_terms(up, targets, 0.2).sum -
                            label_smoothed_loss_terms(down, targets, 0.2).sum) / 2e-6;
    EXPECT_NEAR(terms.grad.data()[i], numeric, 1e-8);
  }
}

}  // namespace
}  // namespace slt
