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
#include <string>
#include <vector>

#include "slt/model_config.h"
#include "slt/tensor.h"

namespace slt {

template <typename S>
struct AttentionWeights {
  Mat<S> q;  // d_model x inner
  Mat<S> k;
  Mat<S> v;
  Mat<S> o;  // inner x d_model
};

template <typename S>
struct FeedForwardWeights {
  Mat<S> wi;       // d_model x d_ff; passes through the activation
  Mat<S> wi_gate;  // d_model x d_ff, linear branch; empty for relu
  Mat<S> wo;       // d_ff x d_model
};

template <typename S>
struct EncoderLayerWeights {
  Mat<S> attn_norm;  // 1 x d_model
  AttentionWeights<S> self_attn;
  Mat<S> ffn_norm;
  FeedForwardWeights<S> ffn;
};

template <typename S>
struct DecoderLayerWeights {
  Mat<S> self_norm;
  AttentionWeights<S> self_attn;
  Mat<S> cross_norm;
  AttentionWeights<S> cross_attn;
  Mat<S> ffn_norm;
  FeedForwardWeights<S> ffn;
};

// Every learnable tensor of the pose projection and the encoder-decoder.
// Vectors are stored as 1-row matrices and reported with rank 1.
template <typename S>
struct ModelParams {
  ModelConfig config;
  Mat<S> proj_w;  // pose_dim x d_model
  Mat<S> proj_b;  // 1 x d_model
  Mat<S> embedding;  // vocab x d_model
  Mat<S> lm_head;    // d_model x vocab, empty when tied
  Mat<S> enc_rel_bias;  // rel_buckets x heads
  Mat<S> dec_rel_bias;
  std::vector<EncoderLayerWeights<S>> encoder;
  Mat<S> enc_final_norm;
  std::vector<DecoderLayerWeights<S>> decoder;
  Mat<S> dec_final_norm;
};

// Calls fn(name, tensor, rank) for every allocated tensor in a fixed order.
// Works on const and mutable params alike.
template <typename P, typename Fn>
void for_each_tensor(P& p, Fn&& fn) {
  fn(std::string("pose_projection.weight"), p.proj_w, 2);
  fn(std::string("pose_projection.bias"), p.proj_b, 1);
  fn(std::string("shared.embedding"), p.embedding, 2);
  if (p.lm_head.size() > 0) fn(std::string("lm_head.weight"), p.lm_head, 2);
  fn(std::string("encoder.relative_bias"), p.enc_rel_bias, 2);
  auto attn = [&](const std::string& prefix, auto& a) {
    fn(prefix + ".q", a.q, 2);
    fn(prefix + ".k", a.k, 2);
    fn(prefix + ".v", a.v, 2);
    fn(prefix + ".o", a.o, 2);
  };
  auto ffn = [&](const std::string& prefix, auto& f) {
    if (f.wi_gate.size() > 0) {
      fn(prefix + ".wi_0", f.wi, 2);
      fn(prefix + ".wi_1", f.wi_gate, 2);
    } else {
      fn(prefix + ".wi", f.wi, 2);
    }
    fn(prefix + ".wo", f.wo, 2);
  };
  for (std::size_t l = 0; l < p.encoder.size(); ++l) {
    const std::string b = "encoder.block." + std::to_string(l);
    auto& layer = p.encoder[l];
    fn(b + ".self_attn_norm", layer.attn_norm, 1);
    attn(b + ".self_attn", layer.self_attn);
    fn(b + ".ffn_norm", layer.ffn_norm, 1);
    ffn(b + ".ffn", layer.ffn);
  }
  fn(std::string("encoder.final_norm"), p.enc_final_norm, 1);
  fn(std::string("decoder.relative_bias"), p.dec_rel_bias, 2);
  for (std::size_t l = 0; l < p.decoder.size(); ++l) {
    const std::string b = "decoder.block." + std::to_string(l);
    auto& layer = p.decoder[l];
    fn(b + ".self_attn_norm", layer.self_norm, 1);
    attn(b + ".self_attn", layer.self_attn);
    fn(b + ".cross_attn_norm", layer.cross_norm, 1);
    attn(b + ".cross_attn", layer.cross_attn);
    fn(b + ".ffn_norm", layer.ffn_norm, 1);
    ffn(b + ".ffn", layer.ffn);
  }
  fn(std::string("decoder.final_norm"), p.dec_final_norm, 1);
}

// Runs fn(name, a_tensor, b_tensor, rank) over two parameter sets with the
// same layout.
template <typename PA, typename PB, typename Fn>
void for_each_tensor_pair(PA& a, PB& b, Fn&& fn) {
  std::vector<decltype(&a.proj_w)> as;
  std::vector<std::string> names;
  std::vector<int> ranks;
  for_each_tensor(a, [&](const std::string& n, auto& t, int r) {
    names.push_back(n);
    as.push_back(&t);
    ranks.push_back(r);
  });
  std::size_t i = 0;
  for_each_tensor(b, [&](const std::string&, auto& t, int) {
    fn(names[i], *as[i], t, ranks[i]);
    ++i;
  });
}

struct TensorShape {
  std::string name;
  int rank = 2;
  long rows = 0;
  long cols = 0;

  long numel() const { return rows * cols; }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

// Zero-filled tensors with the shapes `config` prescribes.
template <typename S>
ModelParams<S> allocate_params(const ModelConfig& config);

// Random initialization, deterministic in `seed`. Relative-bias tables start
// from a fixed locality prior: zero at distance 0, decreasing with distance.
template <typename S>
ModelParams<S> init_params(const ModelConfig& config, std::uint64_t seed);

template <typename S>
ModelParams<S> zeros_like(const ModelParams<S>& p);

template <typename To, typename From>
ModelParams<To> cast_params(const ModelParams<From>& p) {
  ModelParams<To> out = allocate_params<To>(p.config);
  for_each_tensor_pair(p, out, [](const std::string&, const auto& src,
                                  auto& dst, int) { dst = src.template cast<To>(); });
  return out;
}

// Shapes of the tensors actually allocated, in for_each_tensor order.
template <typename S>
std::vector<TensorShape> tensor_inventory(const ModelParams<S>& p) {
  std::vector<TensorShape> shapes;
  for_each_tensor(p, [&](const std::string& name, const auto& t, int rank) {
    shapes.push_back({name, rank, static_cast<long>(t.rows()),
                      static_cast<long>(t.cols())});
  });
  return shapes;
}

template <typename S>
std::int64_t count_allocated(const ModelParams<S>& p) {
  std::int64_t n = 0;
  for_each_tensor(p, [&](const std::string&, const auto& t, int) {
    n += static_cast<std::int64_t>(t.size());
  });
  return n;
}

template <typename S>
bool all_finite(const ModelParams<S>& p) {
  bool ok = true;
  for_each_tensor(p, [&](const std::string&, const auto& t, int) {
    ok = ok && t.allFinite();
  });
  return ok;
}

}  // namespace slt
