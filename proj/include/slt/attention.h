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

// Multi-head dot-product attention with bucketed relative position bias.
//
// Scores are q.k^T + bias with no 1/sqrt(d_kv) factor; the query weights are
// initialized small instead.

#pragma once

#include <cstdint>
#include <vector>

#include "slt/tensor.h"

namespace slt {

// Maps relative_position = key_pos - query_pos to a bucket.
//
// Bidirectional: the upper half of the buckets holds keys to the right.
// Within a half, distances below half the half-size get their own bucket and
// larger ones are log-spaced up to max_distance; anything beyond shares the
// last bucket. Causal mode treats keys to the right as distance 0.
int relative_bucket(long relative_position, bool bidirectional,
                    int num_buckets = 32, int max_distance = 128);

// Row-major [num_queries x num_keys] bucket indices, with query i at
// position i + query_offset and key j at position j.
std::vector<int> bucket_matrix(int num_queries, int num_keys, bool bidirectional,
                               int num_buckets, int max_distance,
                               int query_offset = 0);

// Which keys a query may attend to.
struct AttentionMask {
  std::vector<std::uint8_t> key_valid;  // empty: every key is valid
  bool causal = false;                  // key j visible to query i iff j <= i

  bool visible(long i, long j) const {
    if (causal && j > i) return false;
    return key_valid.empty() || key_valid[static_cast<std::size_t>(j)] != 0;
  }
};

template <typename S>
struct AttentionResult {
  Mat<S> context;             // [nq x heads*d_kv], before the output matrix
  std::vector<Mat<S>> probs;  // per head [nq x nk], masked entries exactly 0
};

// Per head: softmax over visible keys of (q_h k_h^T + bias_h), times v_h.
// `head_bias` is either empty or holds one [nq x nk] matrix per head.
// A query with no visible key gets an all-zero weight row and output.
// `prob_dropout`, when given, holds per-head multipliers applied to the
// weights before they meet the values; `probs` stays undropped.
template <typename S>
AttentionResult<S> attend(const Mat<S>& q, const Mat<S>& k, const Mat<S>& v,
                          int num_heads, const std::vector<Mat<S>>& head_bias,
                          const AttentionMask& mask,
                          const std::vector<Mat<S>>* prob_dropout = nullptr);

// attend() followed by the output projection.
template <typename S>
Mat<S> attention(const Mat<S>& q, const Mat<S>& k, const Mat<S>& v,
                 int num_heads, const std::vector<Mat<S>>& head_bias,
                 const AttentionMask& mask, const Mat<S>& output_weight);

// Expands a [num_buckets x heads] table into per-head bias matrices.
template <typename S>
std::vector<Mat<S>> expand_bias(const Mat<S>& table,
                                const std::vector<int>& buckets, int num_queries,
                                int num_keys);

}  // namespace slt
