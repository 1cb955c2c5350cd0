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

#pragma once

#include <cstdint>
#include <span>

#include "slt/tensor.h"
#include "slt/vocab.h"

namespace slt {

template <typename S>
struct SmoothedLossTerms {
  double sum = 0.0;  // summed over counted positions
  long count = 0;    // positions that entered the sum
  Mat<S> grad;       // d(sum)/d(logits)
};

// Label-smoothed cross-entropy. Target distribution per counted position is
// (1 - epsilon) * onehot(target) + epsilon / V. A position counts when its
// `valid` flag is set, or, when `valid` is empty, when its target is not pad.
template <typename S>
SmoothedLossTerms<S> label_smoothed_loss_terms(
    const Mat<S>& logits, std::span<const TokenId> targets, double epsilon,
    std::span<const std::uint8_t> valid = {});

// Mean over counted positions. Throws kUndefinedMean when nothing counts.
template <typename S>
double label_smoothed_loss(const Mat<S>& logits, std::span<const TokenId> targets,
                           double epsilon, std::span<const std::uint8_t> valid = {});

}  // namespace slt
