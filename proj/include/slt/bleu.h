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

// Corpus BLEU with SacreBLEU defaults: 13a tokenization, case-sensitive,
// one reference per hypothesis, exponential smoothing of zero precisions.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace slt {

inline constexpr int kMaxBleuOrder = 4;

// mteval-v13a tokenization.
std::vector<std::string> tokenize_13a(const std::string& text);

struct BleuReport {
  // bleu[n - 1] is BLEU-n (geometric mean over orders 1..n), in percent.
  std::array<double, kMaxBleuOrder> bleu{};
  // Per-order precisions in percent, smoothed where the raw count is zero.
  std::array<double, kMaxBleuOrder> precisions{};
  std::array<std::int64_t, kMaxBleuOrder> matches{};
  std::array<std::int64_t, kMaxBleuOrder> totals{};
  double brevity_penalty = 0.0;
  std::int64_t hyp_length = 0;
  std::int64_t ref_length = 0;
};

// Throws kInput when the lists differ in length or are empty.
BleuReport corpus_bleu(std::span<const std::string> hypotheses,
                       std::span<const std::string> references);

void to_json(nlohmann::json& j, const BleuReport& r);

}  // namespace slt
