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

#include "slt/model_params.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "slt/attention.h"

namespace slt {
namespace {

template <typename S>
AttentionWeights<S> alloc_attention(const ModelConfig& c) {
  return {Mat<S>::Zero(c.d_model, c.inner_dim()),
          Mat<S>::Zero(c.d_model, c.inner_dim()),
          Mat<S>::Zero(c.d_model, c.inner_dim()),
          Mat<S>::Zero(c.inner_dim(), c.d_model)};
}

template <typename S>
FeedForwardWeights<S> alloc_ffn(const ModelConfig& c) {
  FeedForwardWeights<S> f;
  f.wi = Mat<S>::Zero(c.d_model, c.d_ff);
  if (c.ffn_variant == FfnVariant::kGatedGelu) {
    f.wi_gate = Mat<S>::Zero(c.d_model, c.d_ff);
  }
  f.wo = Mat<S>::Zero(c.d_ff, c.d_model);
  return f;
}

template <typename S>
Mat<S> ones_row(int n) {
  return Mat<S>::Ones(1, n);
}

// Relative-bias tables start as a locality prior: head h adds
// -slope_h * |distance| with slope_h = 2^(-8 (h + 1) / heads), where a
// bucket's distance is the smallest one mapping to it.
template <typename S>
void init_locality_bias(Mat<S>& table, const ModelConfig& c, bool bidirectional) {
  std::vector<long> nearest(static_cast<std::size_t>(c.rel_buckets), -1);
  for (long dist = 0; dist <= 4L * c.rel_max_distance; ++dist) {
    for (long rel : {-dist, dist}) {
      const auto b = static_cast<std::size_t>(
          relative_bucket(rel, bidirectional, c.rel_buckets, c.rel_max_distance));
      if (nearest[b] < 0) nearest[b] = dist;
    }
  }
  for (int h = 0; h < c.num_heads; ++h) {
    const double slope = std::pow(2.0, -8.0 * (h + 1) / c.num_heads);
    for (int b = 0; b < c.rel_buckets; ++b) {
      const long dist = std::max(0L, nearest[static_cast<std::size_t>(b)]);
      table(b, h) = static_cast<S>(-slope * static_cast<double>(dist));
    }
  }
}

}  // namespace

template <typename S>
ModelParams<S> allocate_params(const ModelConfig& c) {
  c.validate();
  ModelParams<S> p;
  p.config = c;
  p.proj_w = Mat<S>::Zero(c.pose_dim, c.d_model);
  p.proj_b = Mat<S>::Zero(1, c.d_model);
  p.embedding = Mat<S>::Zero(c.vocab_size, c.d_model);
  if (!c.tie_output_embedding) p.lm_head = Mat<S>::Zero(c.d_model, c.vocab_size);
  p.enc_rel_bias = Mat<S>::Zero(c.rel_buckets, c.num_heads);
  p.dec_rel_bias = Mat<S>::Zero(c.rel_buckets, c.num_heads);
  p.encoder.resize(c.num_layers);
  for (auto& l : p.encoder) {
    l.attn_norm = Mat<S>::Zero(1, c.d_model);
    l.self_attn = alloc_attention<S>(c);
    l.ffn_norm = Mat<S>::Zero(1, c.d_model);
    l.ffn = alloc_ffn<S>(c);
  }
  p.enc_final_norm = Mat<S>::Zero(1, c.d_model);
  p.decoder.resize(c.num_layers);
  for (auto& l : p.decoder) {
    l.self_norm = Mat<S>::Zero(1, c.d_model);
    l.self_attn = alloc_attention<S>(c);
    l.cross_norm = Mat<S>::Zero(1, c.d_model);
    l.cross_attn = alloc_attention<S>(c);
    l.ffn_norm = Mat<S>::Zero(1, c.d_model);
    l.ffn = alloc_ffn<S>(c);
  }
  p.dec_final_norm = Mat<S>::Zero(1, c.d_model);
  return p;
}

// Normal initializers follow the usual scheme for this model family:
// q ~ (d_model * d_kv)^-1/2, k/v ~ d_model^-1/2, o ~ inner^-1/2,
// wi ~ d_model^-1/2, wo ~ d_ff^-1/2, embeddings ~ 1, norms = 1. The pose
// projection uses the uniform +-1/sqrt(fan_in) rule of a fresh linear layer;
// relative-bias tables use the locality prior above.
template <typename S>
ModelParams<S> init_params(const ModelConfig& c, std::uint64_t seed) {
  ModelParams<S> p = allocate_params<S>(c);
  std::mt19937_64 rng(seed);
  auto normal = [&](Mat<S>& m, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(dist(rng));
  };
  auto uniform = [&](Mat<S>& m, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(dist(rng));
  };
  const double d = c.d_model;
  auto init_attn = [&](AttentionWeights<S>& a) {
    normal(a.q, 1.0 / std::sqrt(d * c.d_kv));
    normal(a.k, 1.0 / std::sqrt(d));
    normal(a.v, 1.0 / std::sqrt(d));
    normal(a.o, 1.0 / std::sqrt(static_cast<double>(c.inner_dim())));
  };
  auto init_ffn = [&](FeedForwardWeights<S>& f) {
    normal(f.wi, 1.0 / std::sqrt(d));
    if (f.wi_gate.size() > 0) normal(f.wi_gate, 1.0 / std::sqrt(d));
    normal(f.wo, 1.0 / std::sqrt(static_cast<double>(c.d_ff)));
  };

  const double fan_in = 1.0 / std::sqrt(static_cast<double>(c.pose_dim));
  uniform(p.proj_w, fan_in);
  uniform(p.proj_b, fan_in);
  normal(p.embedding, 1.0);
  if (p.lm_head.size() > 0) normal(p.lm_head, 1.0 / std::sqrt(d));
  init_locality_bias(p.enc_rel_bias, c, true);
  init_locality_bias(p.dec_rel_bias, c, false);
  for (auto& l : p.encoder) {
    l.attn_norm = ones_row<S>(c.d_model);
    init_attn(l.self_attn);
    l.ffn_norm = ones_row<S>(c.d_model);
    init_ffn(l.ffn);
  }
  p.enc_final_norm = ones_row<S>(c.d_model);
  for (auto& l : p.decoder) {
    l.self_norm = ones_row<S>(c.d_model);
    init_attn(l.self_attn);
    l.cross_norm = ones_row<S>(c.d_model);
    init_attn(l.cross_attn);
    l.ffn_norm = ones_row<S>(c.d_model);
    init_ffn(l.ffn);
  }
  p.dec_final_norm = ones_row<S>(c.d_model);
  return p;
}

template <typename S>
ModelParams<S> zeros_like(const ModelParams<S>& p) {
  return allocate_params<S>(p.config);
}

template ModelParams<float> allocate_params<float>(const ModelConfig&);
template ModelParams<double> allocate_params<double>(const ModelConfig&);
template ModelParams<float> init_params<float>(const ModelConfig&, std::uint64_t);
template ModelParams<double> init_params<double>(const ModelConfig&, std::uint64_t);
template ModelParams<float> zeros_like(const ModelParams<float>&);
template ModelParams<double> zeros_like(const ModelParams<double>&);

}  // namespace slt
