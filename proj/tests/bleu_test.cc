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

#include "slt/bleu.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "oracles.h"
#include "slt/error.h"

namespace slt {
namespace {

using testing::naive_bleu;
using testing::Strings;

TEST(Tokenize13a, Examples) {
  EXPECT_EQ(tokenize_13a("hello world"), (Strings{"hello", "world"}));
  EXPECT_TRUE(tokenize_13a("").empty());
  EXPECT_TRUE(tokenize_13a("   \n ").empty());
  EXPECT_EQ(tokenize_13a("it's a test."), (Strings{"it's", "a", "test", "."}));
  EXPECT_EQ(tokenize_13a("a,b 1,000 3-4 x.y. (ok)!"),
            (Strings{"a", ",", "b", "1,000", "3", "-", "4", "x", ".", "y", ".", "(", "ok", ")",
                     "!"}));
  EXPECT_EQ(tokenize_13a("Hello, World... 12.5% \"quoted\" &amp; <tag> e-mail 2-3-4 x/y"),
            (Strings{"Hello", ",", "World", ".", ".", ".", "12.5", "%", "\"", "quoted", "\"",
                     "&", "<", "tag", ">", "e-mail", "2", "-", "3", "-", "4", "x", "/", "y"}));
  EXPECT_EQ(tokenize_13a("a\tb\nc-\nd"), (Strings{"a", "b", "cd"}));
}

TEST(CorpusBleu, FrozenReferenceScorerValues) {
  const Strings hyps{"the cat sat on the mat", "a quick brown fox", "hello there general kenobi",
                     "x"};
  const Strings refs{"the cat sat on a mat", "the quick brown fox jumps", "hello there", "y z"};
  const BleuReport r = corpus_bleu(hyps, refs);
  const std::array<double, 4> want{66.66666666666669, 60.3022689155527, 51.47142492000891,
                                   40.63798282013441};
  for (int n = 0; n < 4; ++n) EXPECT_NEAR(r.bleu[n], want[n], 1e-9) << n;
  EXPECT_EQ(r.matches, (std::array<std::int64_t, 4>{10, 6, 3, 1}));
  EXPECT_EQ(r.totals, (std::array<std::int64_t, 4>{15, 11, 8, 5}));
  EXPECT_EQ(r.brevity_penalty, 1.0);
  EXPECT_EQ(r.hyp_length, 15);
  EXPECT_EQ(r.ref_length, 15);
}

TEST(CorpusBleu, FrozenSmoothedValues) {
  const Strings hyps{"a b c d", "e f"};
  const Strings refs{"a b x d", "e g"};
  const BleuReport r = corpus_bleu(hyps, refs);
  const std::array<double, 4> want{66.66666666666669, 40.82482904638629, 34.66806371753173,
                                   31.947155212313625};
  for (int n = 0; n < 4; ++n) EXPECT_NEAR(r.bleu[n], want[n], 1e-9) << n;
  EXPECT_NEAR(r.precisions[1], 25.0, 1e-12);
  EXPECT_NEAR(r.precisions[2], 25.0, 1e-12);
  EXPECT_NEAR(r.precisions[3], 25.0, 1e-12);
}

TEST(CorpusBleu, BrevityPenaltyExample) {
  const BleuReport r = corpus_bleu(Strings{"the cat sat"}, Strings{"the cat sat down"});
  EXPECT_NEAR(r.brevity_penalty, std::exp(1.0 - 4.0 / 3.0), 1e-15);
  EXPECT_NEAR(r.bleu[0], 71.65313105737896, 1e-9);
  EXPECT_NEAR(r.bleu[1], 71.65313105737896, 1e-9);
  EXPECT_EQ(r.bleu[3], 0.0);
}

TEST(CorpusBleu, IdenticalCorpusIsHundred) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    Strings c;
    for (int i = 0; i < 10; ++i) {
      std::string s;
      const int len = 4 + static_cast<int>(rng() % 6);
      for (int k = 0; k < len; ++k) s += (k ? " w" : "w") + std::to_string(rng() % 8) + (k % 3 ? "," : "");
      c.push_back(s);
    }
    const BleuReport r = corpus_bleu(c, c);
    for (double b : r.bleu) EXPECT_EQ(b, 100.0);
  }
}

TEST(CorpusBleu, EmptyHypothesisScoresZero) {
  const BleuReport r = corpus_bleu(Strings{""}, Strings{"a b"});
  EXPECT_EQ(r.brevity_penalty, 0.0);
  for (double b : r.bleu) EXPECT_EQ(b, 0.0);
}

TEST(CorpusBleu, InputErrors) {
  for (auto fn : {+[] { corpus_bleu(Strings{}, Strings{}); },
                  +[] { corpus_bleu(Strings{"a"}, Strings{"a", "b"}); }}) {
    try {
      fn();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInput);
    }
  }
}

struct RandomCorpus {
  Strings hyps, refs;
};

RandomCorpus random_corpus(std::uint64_t seed, int pairs, int vocab) {
  std::mt19937_64 rng(seed);
  RandomCorpus c;
  auto sentence = [&](int len) {
    std::string s;
    for (int k = 0; k < len; ++k) s += (k ? " w" : "w") + std::to_string(rng() % vocab);
    return s;
  };
  for (int i = 0; i < pairs; ++i) {
    c.refs.push_back(sentence(3 + static_cast<int>(rng() % 8)));
    c.hyps.push_back(sentence(2 + static_cast<int>(rng() % 9)));
  }
  return c;
}

TEST(CorpusBleu, MatchesNaiveOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RandomCorpus c = random_corpus(seed, 50, 6 + static_cast<int>(seed % 10));
    const BleuReport r = corpus_bleu(c.hyps, c.refs);
    const auto want = naive_bleu(c.hyps, c.refs);
    for (int n = 0; n < 4; ++n) EXPECT_NEAR(r.bleu[n], want[n], 1e-6) << seed << " " << n;
  }
}

TEST(CorpusBleu, PermutationInvariant) {
  const RandomCorpus c = random_corpus(77, 50, 8);
  const BleuReport base = corpus_bleu(c.hyps, c.refs);
  std::vector<std::size_t> order(c.hyps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    Strings h, r;
    for (std::size_t i : order) h.push_back(c.hyps[i]), r.push_back(c.refs[i]);
    const BleuReport p = corpus_bleu(h, r);
    EXPECT_EQ(p.bleu, base.bleu);
    EXPECT_EQ(p.matches, base.matches);
  }
}

TEST(CorpusBleu, NonIncreasingInOrderWhenPrecisionsAreOrdered) {
  int checked = 0;
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    const RandomCorpus c = random_corpus(seed, 30, 4);
    const BleuReport r = corpus_bleu(c.hyps, c.refs);
    if (!std::is_sorted(r.precisions.rbegin(), r.precisions.rend())) continue;
    ++checked;
    for (int n = 1; n < 4; ++n) EXPECT_LE(r.bleu[n], r.bleu[n - 1] + 1e-12);
    for (double b : r.bleu) {
      EXPECT_GE(b, 0.0);
      EXPECT_LE(b, 100.0);
    }
  }
  EXPECT_GT(checked, 10);
}

TEST(CorpusBleu, ReportJsonCarriesAllFields) {
  nlohmann::json j = corpus_bleu(Strings{"a b c"}, Strings{"a b d"});
  for (const char* k : {"bleu1", "bleu2", "bleu3", "bleu4", "precisions", "matches", "totals", "brevity_penalty",
                        "hyp_length", "ref_length"}) {
    EXPECT_TRUE(j.contains(k)) << k << " in " << j.dump();
  }
}

}  // namespace
}  // namespace slt
