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

// Closed-form parameter counts and encoder self-attention FLOPs, plus a
// wall-clock benchmark of the attention kernel.
//
// FLOPs count a multiply-add as 2. Per encoder layer and sequence length n,
// with inner = heads * d_kv:
//   quadratic term  4 n^2 inner   (q k^T scores and the weighted sum of v)
//   projection term 8 n d_model inner   (q, k, v and output matrices)
// Softmax and normalization work is not counted.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "slt/model_config.h"

namespace slt {

struct ParamGroup {
  std::string name;
  std::int64_t count = 0;
};

struct ParamReport {
  std::vector<ParamGroup> groups;
  std::int64_t total = 0;  // sum of groups
};

// Must agree exactly with the tensors allocate_params creates.
ParamReport count_parameters(const ModelConfig& config);

struct AttentionFlops {
  std::int64_t n = 0;
  std::int64_t quadratic_per_layer = 0;
  std::int64_t projection_per_layer = 0;
  std::int64_t quadratic_total = 0;  // times num_layers
  std::int64_t projection_total = 0;
  double quadratic_share() const {
    return static_cast<double>(quadratic_total) /
           static_cast<double>(quadratic_total + projection_total);
  }
};

// Throws kConfig for n < 1.
AttentionFlops attention_flops(const ModelConfig& config, std::int64_t n);

// 100 * (1 - quad(to) / quad(from)).
double quadratic_reduction_percent(const AttentionFlops& from, const AttentionFlops& to);

struct FpsRow {
  int fps = 0;
  std::int64_t n = 0;  // min(max_input_frames, round(fps * seconds))
  AttentionFlops flops;
};

struct ReductionRow {
  int from_fps = 0;
  int to_fps = 0;
  double quadratic_reduction_percent = 0.0;
  double total_reduction_percent = 0.0;
};

struct TradeoffReport {
  ParamReport params;
  double clip_seconds = 0.0;
  std::vector<FpsRow> rows;
  // One row per pair with from_fps > to_fps.
  std::vector<ReductionRow> reductions;
};

// Throws kConfig for non-positive fps values or duration.
TradeoffReport tradeoff_report(const ModelConfig& config, const std::vector<int>& fps_list,
                               double clip_seconds);

struct TimingRow {
  std::int64_t n = 0;
  double median_seconds = 0.0;
  int inner_loops = 1;  // passes per timed sample, raised for fast kernels
};

struct TimingReport {
  std::vector<TimingRow> rows;
  int repetitions = 0;
  int warmup = 0;
  // Least-squares slope of log time against log n over the points with
  // n >= largest n / 10.
  double fitted_exponent = 0.0;
  std::vector<std::string> notes;
};

// Median wall time of one encoder self-attention pass (q/k/v projections,
// bias, softmax, weighted sum, output projection) on random float inputs,
// after `warmup` untimed passes. Throws kConfig for repetitions < 1, empty
// or non-positive n values, or n above max_input_frames * 16.
TimingReport measure_attention_time(const ModelConfig& config, const std::vector<std::int64_t>& ns,
                                    int repetitions, int warmup = 5);

void to_json(nlohmann::json& j, const ParamReport& r);
void to_json(nlohmann::json& j, const AttentionFlops& f);
void to_json(nlohmann::json& j, const TradeoffReport& r);
void to_json(nlohmann::json& j, const TimingReport& r);

struct SweepEntry {
  std::string label;
  ModelConfig config;
  std::int64_t total = 0;
};

// Variants of the compact configuration family (FFN type, output tying,
// width, depth, heads) with their totals, in a fixed order.
std::vector<SweepEntry> config_sweep(int vocab_size = 32128);

}  // namespace slt
