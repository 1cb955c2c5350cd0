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

#include "slt/decoding.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "reference_model.h"
#include "oracles.h"
#include "slt/error.h"

namespace slt {
namespace {

using testing::TreeScorer;
using testing::MarkovScorer;
using testing::exhaustive_best;
using testing::Scored;

TEST(LogSoftmax, NormalizesAndShifts) {
  const std::vector<double> logits{1000.0, 1001.0, 999.0};
  const auto lp = log_softmax(logits);
  double z = 0.0;
  for (double v : lp) z += std::exp(v);
  EXPECT_NEAR(z, 1.0, 1e-12);
  EXPECT_NEAR(lp[1] - lp[0], 1.0, 1e-12);
}

TEST(Greedy, EosFirstGivesEmptyTranslation) {
  MarkovScorer s({{0.1, 0.8, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.8, 0.1}});
  const auto out = greedy_decode(s, 10);
  EXPECT_EQ(out, (std::vector<TokenId>{kEosId}));
  EXPECT_EQ(decode_ids(out, Vocab::from_words({})), "");
}

TEST(Greedy, TiesGoToLowestIdAndLengthIsCapped) {
  MarkovScorer s({{0.1, 0.1, 0.4, 0.4}, {0.25, 0.25, 0.25, 0.25},
                  {0.1, 0.1, 0.4, 0.4}, {0.1, 0.1, 0.4, 0.4}});
  EXPECT_EQ(greedy_decode(s, 5), (std::vector<TokenId>{2, 2, 2, 2, 2}));
  EXPECT_EQ(greedy_decode(s, 1).size(), 1u);
}

TEST(Beam, RejectsBadOptions) {
  TreeScorer s(4, 1);
  for (auto opts : {BeamOptions{.beam = 0}, BeamOptions{.max_len = 0}, BeamOptions{.n_best = 0}}) {
    try {
      beam_search(s, opts);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kConfig);
    }
  }
}

TEST(Beam, WideBeamEqualsExhaustiveSearch) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    for (double alpha : {0.0, 0.6, 1.0, 2.0}) {
      TreeScorer s(3, seed, seed % 2 ? 0.5 : 3.0);
      const Scored want = exhaustive_best(s, 4, alpha);
      const auto got = beam_search(s, {.beam = 81, .max_len = 4, .length_alpha = alpha});
      ASSERT_FALSE(got.empty());
      EXPECT_EQ(got.front().tokens, want.tokens) << "seed " << seed << " alpha " << alpha;
      EXPECT_NEAR(got.front().score, want.score, 1e-12);
    }
  }
}

TEST(Beam, StochasticMatrixMatchesExhaustive) {
  MarkovScorer s({{0.2, 0.3, 0.5}, {0.6, 0.2, 0.2}, {0.1, 0.45, 0.45}});
  const Scored want = exhaustive_best(s, 4, 1.0);
  const auto got = beam_search(s, {.beam = 81, .max_len = 4});
  EXPECT_EQ(got.front().tokens, want.tokens);
}

TEST(Beam, BeamOneIsGreedyOnRandomModels) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    ModelConfig c = testing::tiny_config(7, seed % 2 ? FfnVariant::kGatedGelu : FfnVariant::kRelu,
                                         seed % 3 != 0);
    auto p = testing::random_model<float>(c, seed, 0.8);
    const Mat<float> frames = testing::random_frames<float>(5 + static_cast<int>(seed), seed);
    const auto greedy = greedy_decode(p, frames, 12);
    EXPECT_EQ(beam_decode(p, frames, {.beam = 1, .max_len = 12}), greedy) << seed;
    EXPECT_EQ(greedy_decode(p, frames, 12), greedy);
  }
}

TEST(Beam, OutputsRespectLengthAndEosContracts) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    TreeScorer s(5, seed, 1.0);
    const auto hyps = beam_search(s, {.beam = 4, .max_len = 6, .n_best = 4});
    ASSERT_FALSE(hyps.empty());
    EXPECT_LE(hyps.size(), 4u);
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      const auto& h = hyps[i];
      EXPECT_TRUE(h.finished);
      EXPECT_LE(h.logprob_sum, 0.0);
      EXPECT_LE(h.tokens.size(), 6u);
      const auto eos = std::find(h.tokens.begin(), h.tokens.end(), kEosId);
      if (eos != h.tokens.end()) {
        EXPECT_EQ(eos + 1, h.tokens.end());
      }
      EXPECT_NEAR(h.score, h.logprob_sum / static_cast<double>(h.tokens.size()), 1e-12);
      if (i > 0) {
        EXPECT_GE(hyps[i - 1].score, h.score);
      }
    }
  }
}

TEST(Beam, DeterministicAcrossRuns) {
  TreeScorer a(6, 99), b(6, 99);
  const auto x = beam_search(a, {.beam = 5, .max_len = 8, .n_best = 5});
  const auto y = beam_search(b, {.beam = 5, .max_len = 8, .n_best = 5});
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x[i].tokens, y[i].tokens);
    EXPECT_EQ(x[i].score, y[i].score);
  }
}

TEST(Beam, EarlyStopSavesWork) {
  // eos is overwhelmingly likely after the first token, so the first
  // finished hypothesis ends the search long before max_len.
  MarkovScorer chain({{0.01, 0.01, 0.98}, {0.34, 0.33, 0.33}, {0.005, 0.99, 0.005}});
  const auto hyps = beam_search(chain, {.beam = 3, .max_len = 128});
  EXPECT_EQ(hyps.front().tokens, (std::vector<TokenId>{2, kEosId}));
  TreeScorer s(6, 5);
  beam_search(s, {.beam = 5, .max_len = 128});
  EXPECT_LT(s.calls, 5 * 128);
}

}  // namespace
}  // namespace slt
