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

// Greedy and beam-search generation over any next-token scorer.
//
// Token sequences returned here include the terminal eos when one was
// emitted, and never hold more than max_len tokens.

#pragma once

#include <span>
#include <vector>

#include "slt/seq2seq.h"
#include "slt/vocab.h"

namespace slt {

// Log-probabilities of the next token given the tokens generated so far.
class StepScorer {
 public:
  virtual ~StepScorer() = default;
  virtual int vocab_size() const = 0;
  virtual std::vector<double> log_probs(std::span<const TokenId> prefix) = 0;
};

// Wraps a model and one encoded clip.
template <typename S>
class ModelScorer : public StepScorer {
 public:
  ModelScorer(const ModelParams<S>& params, EncodedSource<S> source)
      : params_(params), source_(std::move(source)) {}

  int vocab_size() const override { return params_.config.vocab_size; }
  std::vector<double> log_probs(std::span<const TokenId> prefix) override;

 private:
  const ModelParams<S>& params_;
  EncodedSource<S> source_;
};

std::vector<double> log_softmax(std::span<const double> logits);

struct BeamHypothesis {
  std::vector<TokenId> tokens;
  double logprob_sum = 0.0;
  bool finished = false;
  double score = 0.0;  // logprob_sum / len^alpha, set once finished
};

struct BeamOptions {
  int beam = 5;
  int max_len = kDefaultMaxOutputTokens;
  double length_alpha = 1.0;
  int n_best = 1;
};

// Appends the most likely token (lowest id on ties) until eos or max_len.
std::vector<TokenId> greedy_decode(StepScorer& scorer, int max_len = kDefaultMaxOutputTokens);

// Finished hypotheses, best first, at most n_best of them. Candidates are
// ranked by logprob_sum and finished ones by score; equal values fall back
// to lexicographic token order. Hypotheses still live at max_len are
// finished as they stand. Throws kConfig for beam < 1 or max_len < 1.
std::vector<BeamHypothesis> beam_search(StepScorer& scorer, const BeamOptions& options);

template <typename S>
std::vector<TokenId> greedy_decode(const ModelParams<S>& params, const Mat<S>& frames,
                                   int max_len = kDefaultMaxOutputTokens) {
  ModelScorer<S> scorer(params, encode(params, frames));
  return greedy_decode(scorer, max_len);
}

template <typename S>
std::vector<TokenId> beam_decode(const ModelParams<S>& params, const Mat<S>& frames,
                                 const BeamOptions& options) {
  ModelScorer<S> scorer(params, encode(params, frames));
  return beam_search(scorer, options).front().tokens;
}

}  // namespace slt
