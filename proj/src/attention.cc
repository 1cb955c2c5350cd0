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

#include "slt/attention.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slt/error.h"

namespace slt {

int relative_bucket(long relative_position, bool bidirectional,
                    int num_buckets, int max_distance) {
  int bucket = 0;
  long n = -relative_position;
  if (bidirectional) {
    num_buckets /= 2;
    if (n < 0) bucket += num_buckets;
    n = std::labs(n);
  } else {
    n = std::max(n, 0L);
  }
  const int max_exact = num_buckets / 2;
  if (n < max_exact) return bucket + static_cast<int>(n);
  const double scaled = std::log(static_cast<double>(n) / max_exact) /
                        std::log(static_cast<double>(max_distance) / max_exact) *
                        (num_buckets - max_exact);
  // Clamp before the integer conversion so huge distances cannot overflow.
  const double capped = std::min(scaled, static_cast<double>(num_buckets));
  const int large = std::min(max_exact + static_cast<int>(capped), num_buckets - 1);
  return bucket + large;
}

std::vector<int> bucket_matrix(int num_queries, int num_keys, bool bidirectional,
                               int num_buckets, int max_distance,
                               int query_offset) {
  std::vector<int> out(static_cast<std::size_t>(num_queries) * num_keys);
  for (int i = 0; i < num_queries; ++i) {
    for (int j = 0; j < num_keys; ++j) {
      out[static_cast<std::size_t>(i) * num_keys + j] = relative_bucket(
          static_cast<long>(j) - (i + query_offset), bidirectional, num_buckets,
          max_distance);
    }
  }
  return out;
}

template <typename S>
std::vector<Mat<S>> expand_bias(const Mat<S>& table,
                                const std::vector<int>& buckets, int num_queries,
                                int num_keys) {
  const int heads = static_cast<int>(table.cols());
  std::vector<Mat<S>> out(heads, Mat<S>(num_queries, num_keys));
  for (int i = 0; i < num_queries; ++i) {
    for (int j = 0; j < num_keys; ++j) {
      const int b = buckets[static_cast<std::size_t>(i) * num_keys + j];
      for (int h = 0; h < heads; ++h) out[h](i, j) = table(b, h);
    }
  }
  return out;
}

template <typename S>
AttentionResult<S> attend(const Mat<S>& q, const Mat<S>& k, const Mat<S>& v,
                          int num_heads, const std::vector<Mat<S>>& head_bias,
                          const AttentionMask& mask,
                          const std::vector<Mat<S>>* prob_dropout) {
  const long nq = q.rows();
  const long nk = k.rows();
  if (num_heads < 1 || q.cols() % num_heads != 0 || k.cols() != q.cols() ||
      v.cols() != q.cols() || v.rows() != nk) {
    fail(ErrorCode::kShape, "inconsistent attention operand shapes");
  }
  if (!mask.key_valid.empty() && static_cast<long>(mask.key_valid.size()) != nk) {
    fail(ErrorCode::kShape, "attention mask length differs from key count");
  }
  if (!head_bias.empty() && static_cast<int>(head_bias.size()) != num_heads) {
    fail(ErrorCode::kShape, "need one bias matrix per head");
  }
  const long dk = q.cols() / num_heads;

  AttentionResult<S> result;
  result.context = Mat<S>::Zero(nq, q.cols());
  result.probs.resize(num_heads);
  for (int h = 0; h < num_heads; ++h) {
    Mat<S> scores =
        matmul_rows_bt<S>(q.middleCols(h * dk, dk), k.middleCols(h * dk, dk));
    if (!head_bias.empty()) scores += head_bias[h];
    Mat<S>& p = result.probs[h];
    p = Mat<S>::Zero(nq, nk);
    for (long i = 0; i < nq; ++i) {
      S max_score = -std::numeric_limits<S>::infinity();
      for (long j = 0; j < nk; ++j) {
        if (mask.visible(i, j)) max_score = std::max(max_score, scores(i, j));
      }
      if (max_score == -std::numeric_limits<S>::infinity()) continue;
      S total = 0;
      for (long j = 0; j < nk; ++j) {
        if (!mask.visible(i, j)) continue;
        const S e = std::exp(scores(i, j) - max_score);
        p(i, j) = e;
        total += e;
      }
      p.row(i) /= total;
    }
    if (prob_dropout != nullptr && !prob_dropout->empty()) {
      const Mat<S> dropped = p.cwiseProduct((*prob_dropout)[h]);
      result.context.middleCols(h * dk, dk) =
          matmul_rows<S>(dropped, v.middleCols(h * dk, dk));
    } else {
      result.context.middleCols(h * dk, dk) =
          matmul_rows<S>(p, v.middleCols(h * dk, dk));
    }
  }
  return result;
}

template <typename S>
Mat<S> attention(const Mat<S>& q, const Mat<S>& k, const Mat<S>& v,
                 int num_heads, const std::vector<Mat<S>>& head_bias,
                 const AttentionMask& mask, const Mat<S>& output_weight) {
  auto r = attend(q, k, v, num_heads, head_bias, mask);
  if (output_weight.rows() != r.context.cols()) {
    fail(ErrorCode::kShape, "output matrix rows differ from attention width");
  }
  return matmul_rows<S>(r.context, output_weight);
}

#define SLT_INSTANTIATE(S)                                                     \
  template std::vector<Mat<S>> expand_bias(const Mat<S>&,                      \
                                           const std::vector<int>&, int, int); \
  template AttentionResult<S> attend(const Mat<S>&, const Mat<S>&,             \
                                     const Mat<S>&, int,                       \
                                     const std::vector<Mat<S>>&,               \
                                     const AttentionMask&,                     \
                                     const std::vector<Mat<S>>*);              \
  template Mat<S> attention(const Mat<S>&, const Mat<S>&, const Mat<S>&, int,  \
                            const std::vector<Mat<S>>&, const AttentionMask&,  \
                            const Mat<S>&);
SLT_INSTANTIATE(float)
SLT_INSTANTIATE(double)
#undef SLT_INSTANTIATE

}  // namespace slt
