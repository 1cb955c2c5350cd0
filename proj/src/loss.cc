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

#include <cmath>

#include "slt/error.h"

namespace slt {

template <typename S>
SmoothedLossTerms<S> label_smoothed_loss_terms(const Mat<S>& logits,
                                               std::span<const TokenId> targets,
                                               double epsilon,
                                               std::span<const std::uint8_t> valid) {
  const long t_len = static_cast<long>(logits.rows());
  const long vocab = static_cast<long>(logits.cols());
  if (static_cast<long>(targets.size()) != t_len) {
    fail(ErrorCode::kShape, "targets and logits disagree on length");
  }
  if (!valid.empty() && static_cast<long>(valid.size()) != t_len) {
    fail(ErrorCode::kShape, "mask and logits disagree on length");
  }
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    fail(ErrorCode::kConfig, "label smoothing must lie in [0, 1)");
  }
  SmoothedLossTerms<S> out;
  out.grad = Mat<S>::Zero(t_len, vocab);
  const double off = epsilon / static_cast<double>(vocab);
  for (long t = 0; t < t_len; ++t) {
    const TokenId gold = targets[static_cast<std::size_t>(t)];
    const bool counted = valid.empty() ? gold != kPadId : valid[static_cast<std::size_t>(t)] != 0;
    if (!counted) continue;
    if (gold < 0 || gold >= vocab) {
      fail(ErrorCode::kInvalidId, "target id " + std::to_string(gold) + " out of range");
    }
    double max_logit = logits(t, 0);
    for (long v = 1; v < vocab; ++v) max_logit = std::max(max_logit, static_cast<double>(logits(t, v)));
    double z = 0.0;
    for (long v = 0; v < vocab; ++v) z += std::exp(static_cast<double>(logits(t, v)) - max_logit);
    const double log_z = max_logit + std::log(z);
    double loss = 0.0;
    for (long v = 0; v < vocab; ++v) {
      const double q = off + (v == gold ? 1.0 - epsilon : 0.0);
      const double logp = static_cast<double>(logits(t, v)) - log_z;
      loss -= q * logp;
      out.grad(t, v) = static_cast<S>(std::exp(logp) - q);
    }
    out.sum += loss;
    ++out.count;
  }
  return out;
}

template <typename S>
double label_smoothed_loss(const Mat<S>& logits, std::span<const TokenId> targets,
                           double epsilon, std::span<const std::uint8_t> valid) {
  const auto terms = label_smoothed_loss_terms(logits, targets, epsilon, valid);
  if (terms.count == 0) {
    fail(ErrorCode::kUndefinedMean, "every position is padding; mean loss is undefined");
  }
  return terms.sum / static_cast<double>(terms.count);
}

#define SLT_INSTANTIATE(S)                                                        \
  template SmoothedLossTerms<S> label_smoothed_loss_terms(                        \
      const Mat<S>&, std::span<const TokenId>, double, std::span<const std::uint8_t>); \
  template double label_smoothed_loss(const Mat<S>&, std::span<const TokenId>,    \
                                      double, std::span<const std::uint8_t>);
SLT_INSTANTIATE(float)
SLT_INSTANTIATE(double)
#undef SLT_INSTANTIATE

}  // namespace slt
