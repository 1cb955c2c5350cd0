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

#include <algorithm>
#include <cmath>
#include <limits>

#include "slt/error.h"

namespace slt {

std::vector<double> log_softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  const double lse = mx + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

template <typename S>
std::vector<double> ModelScorer<S>::log_probs(std::span<const TokenId> prefix) {
  const RowVec<S> logits = decode_step(params_, prefix, source_);
  std::vector<double> l(static_cast<std::size_t>(logits.size()));
  for (Eigen::Index i = 0; i < logits.size(); ++i) l[i] = static_cast<double>(logits(i));
  return log_softmax(l);
}

template class ModelScorer<float>;
template class ModelScorer<double>;

std::vector<TokenId> greedy_decode(StepScorer& scorer, int max_len) {
  std::vector<TokenId> out;
  while (static_cast<int>(out.size()) < max_len) {
    const std::vector<double> lp = scorer.log_probs(out);
    // max_element keeps the first maximum, i.e. the lowest id.
    const auto best = std::max_element(lp.begin(), lp.end());
    const TokenId id = static_cast<TokenId>(best - lp.begin());
    out.push_back(id);
    if (id == kEosId) break;
  }
  return out;
}

namespace {

bool candidate_before(const BeamHypothesis& a, const BeamHypothesis& b) {
  if (a.logprob_sum != b.logprob_sum) return a.logprob_sum > b.logprob_sum;
  return a.tokens < b.tokens;
}

bool finished_before(const BeamHypothesis& a, const BeamHypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tokens < b.tokens;
}

double normalized(double logprob_sum, std::size_t len, double alpha) {
  return logprob_sum / std::pow(static_cast<double>(len), alpha);
}

}  // namespace

std::vector<BeamHypothesis> beam_search(StepScorer& scorer, const BeamOptions& options) {
  if (options.beam < 1) fail(ErrorCode::kConfig, "beam size must be at least 1");
  if (options.max_len < 1) fail(ErrorCode::kConfig, "max_len must be at least 1");
  if (options.n_best < 1) fail(ErrorCode::kConfig, "n_best must be at least 1");
  const auto beam = static_cast<std::size_t>(options.beam);
  const double alpha = options.length_alpha;

  std::vector<BeamHypothesis> live(1);
  std::vector<BeamHypothesis> finished;
  auto finish = [&](BeamHypothesis h) {
    h.finished = true;
    h.score = normalized(h.logprob_sum, h.tokens.size(), alpha);
    finished.push_back(std::move(h));
  };

  for (int len = 1; len <= options.max_len && !live.empty(); ++len) {
    std::vector<BeamHypothesis> candidates;
    for (const BeamHypothesis& h : live) {
      const std::vector<double> lp = scorer.log_probs(h.tokens);
      // Only the top `beam` extensions of one hypothesis can survive the
      // global cut, so each contributes at most that many.
      std::vector<TokenId> order(lp.size());
      for (std::size_t v = 0; v < lp.size(); ++v) order[v] = static_cast<TokenId>(v);
      const std::size_t keep = std::min(beam, order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<long>(keep), order.end(),
                        [&](TokenId a, TokenId b) {
                          if (lp[a] != lp[b]) return lp[a] > lp[b];
                          return a < b;
                        });
      for (std::size_t r = 0; r < keep; ++r) {
        BeamHypothesis c;
        c.tokens = h.tokens;
        c.tokens.push_back(order[r]);
        c.logprob_sum = h.logprob_sum + lp[order[r]];
        candidates.push_back(std::move(c));
      }
    }
    std::sort(candidates.begin(), candidates.end(), candidate_before);
    if (candidates.size() > beam) candidates.resize(beam);

    live.clear();
    for (BeamHypothesis& c : candidates) {
      if (c.tokens.back() == kEosId || len == options.max_len) {
        finish(std::move(c));
      } else {
        live.push_back(std::move(c));
      }
    }
    if (finished.empty() || live.empty()) continue;

    // Log-probabilities are <= 0, so a live hypothesis can at best keep its
    // sum while its length grows; for alpha >= 0 its normalized score is then
    // largest at max_len.
    double best_finished = -std::numeric_limits<double>::infinity();
    for (const auto& f : finished) best_finished = std::max(best_finished, f.score);
    double best_live = -std::numeric_limits<double>::infinity();
    for (const auto& h : live) best_live = std::max(best_live, h.logprob_sum);
    const double bound = alpha >= 0.0
                             ? normalized(best_live, static_cast<std::size_t>(options.max_len), alpha)
                             : normalized(best_live, static_cast<std::size_t>(len + 1), alpha);
    if (best_finished > bound) break;
  }

  std::sort(finished.begin(), finished.end(), finished_before);
  if (finished.size() > static_cast<std::size_t>(options.n_best)) {
    finished.resize(static_cast<std::size_t>(options.n_best));
  }
  return finished;
}

}  // namespace slt
