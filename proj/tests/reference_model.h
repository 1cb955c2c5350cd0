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

// Test-only oracles: a loop-by-loop re-statement of the model forward pass
// on nested std::vectors, a central finite-difference gradient checker, and
// helpers to build small random models. Nothing here calls the library's
// forward code.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "slt/model_params.h"
#include "slt/vocab.h"

namespace slt::testing {

using Grid = std::vector<std::vector<double>>;

inline Grid to_grid(const Mat<double>& m) {
  Grid g(m.rows(), std::vector<double>(m.cols()));
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) g[i][j] = m(i, j);
  return g;
}

inline Grid matmul(const Grid& a, const Grid& b) {
  Grid c(a.size(), std::vector<double>(b.empty() ? 0 : b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < c[i].size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < b.size(); ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  return c;
}

inline Grid add(Grid a, const Grid& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
  return a;
}

inline Grid rmsnorm(const Grid& x, const Mat<double>& scale, double eps) {
  Grid y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double ms = 0.0;
    for (double v : x[i]) ms += v * v;
    ms /= static_cast<double>(x[i].size());
    for (std::size_t j = 0; j < x[i].size(); ++j)
      y[i][j] = x[i][j] / std::sqrt(ms + eps) * scale(0, j);
  }
  return y;
}

inline int ref_bucket(long key_minus_query, bool bidirectional, int buckets, int max_dist) {
  long n = -key_minus_query;
  int base = 0;
  if (bidirectional) {
    buckets /= 2;
    if (n < 0) {
      base = buckets;
      n = -n;
    }
  } else if (n < 0) {
    n = 0;
  }
  const int exact = buckets / 2;
  if (n < exact) return base + static_cast<int>(n);
  int large = exact + static_cast<int>(std::log(static_cast<double>(n) / exact) /
                                       std::log(static_cast<double>(max_dist) / exact) *
                                       (buckets - exact));
  return base + std::min(large, buckets - 1);
}

// bias: table or nullptr; causal restricts keys to j <= i.
inline Grid mha(const Grid& hq, const Grid& hkv, const AttentionWeights<double>& w,
                int heads, int d_kv, const Mat<double>* table, bool bidirectional,
                bool causal, int buckets, int max_dist) {
  const Grid q = matmul(hq, to_grid(w.q));
  const Grid k = matmul(hkv, to_grid(w.k));
  const Grid v = matmul(hkv, to_grid(w.v));
  Grid ctx(hq.size(), std::vector<double>(heads * d_kv, 0.0));
  for (int h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < hq.size(); ++i) {
      std::vector<double> s(hkv.size(), 0.0);
      double mx = -1e300;
      for (std::size_t j = 0; j < hkv.size(); ++j) {
        if (causal && j > i) continue;
        double dot = 0.0;
        for (int d = 0; d < d_kv; ++d) dot += q[i][h * d_kv + d] * k[j][h * d_kv + d];
        if (table) {
          dot += (*table)(ref_bucket(static_cast<long>(j) - static_cast<long>(i),
                                     bidirectional, buckets, max_dist), h);
        }
        s[j] = dot;
        mx = std::max(mx, dot);
      }
      double z = 0.0;
      for (std::size_t j = 0; j < hkv.size(); ++j) {
        if (causal && j > i) continue;
        z += std::exp(s[j] - mx);
      }
      for (std::size_t j = 0; j < hkv.size(); ++j) {
        if (causal && j > i) continue;
        const double p = std::exp(s[j] - mx) / z;
        for (int d = 0; d < d_kv; ++d) ctx[i][h * d_kv + d] += p * v[j][h * d_kv + d];
      }
    }
  }
  return matmul(ctx, to_grid(w.o));
}

inline Grid ffn(const Grid& h, const FeedForwardWeights<double>& w) {
  Grid a = matmul(h, to_grid(w.wi));
  if (w.wi_gate.size() > 0) {
    const Grid lin = matmul(h, to_grid(w.wi_gate));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a[i].size(); ++j) {
        const double x = a[i][j];
        const double g =
            0.5 * x * (1.0 + std::tanh(std::sqrt(2.0 / M_PI) * (x + 0.044715 * x * x * x)));
        a[i][j] = g * lin[i][j];
      }
  } else {
    for (auto& row : a)
      for (double& x : row) x = std::max(x, 0.0);
  }
  return matmul(a, to_grid(w.wo));
}

// Next-token logits after `prefix`, recomputed from scratch.
inline std::vector<double> reference_step_logits(const ModelParams<double>& p,
                                                 const Grid& frames,
                                                 const std::vector<TokenId>& prefix) {
  const ModelConfig& c = p.config;
  Grid x = matmul(frames, to_grid(p.proj_w));
  for (auto& row : x)
    for (int j = 0; j < c.d_model; ++j) row[j] += p.proj_b(0, j);
  for (const auto& l : p.encoder) {
    x = add(x, mha(rmsnorm(x, l.attn_norm, c.norm_epsilon),
                   rmsnorm(x, l.attn_norm, c.norm_epsilon), l.self_attn, c.num_heads,
                   c.d_kv, &p.enc_rel_bias, true, false, c.rel_buckets, c.rel_max_distance));
    x = add(x, ffn(rmsnorm(x, l.ffn_norm, c.norm_epsilon), l.ffn));
  }
  const Grid enc = rmsnorm(x, p.enc_final_norm, c.norm_epsilon);

  std::vector<TokenId> in{kPadId};
  in.insert(in.end(), prefix.begin(), prefix.end());
  Grid y(in.size(), std::vector<double>(c.d_model));
  for (std::size_t t = 0; t < in.size(); ++t)
    for (int j = 0; j < c.d_model; ++j) y[t][j] = p.embedding(in[t], j);
  for (const auto& l : p.decoder) {
    Grid h = rmsnorm(y, l.self_norm, c.norm_epsilon);
    y = add(y, mha(h, h, l.self_attn, c.num_heads, c.d_kv, &p.dec_rel_bias, false, true,
                   c.rel_buckets, c.rel_max_distance));
    h = rmsnorm(y, l.cross_norm, c.norm_epsilon);
    y = add(y, mha(h, enc, l.cross_attn, c.num_heads, c.d_kv, nullptr, false, false,
                   c.rel_buckets, c.rel_max_distance));
    y = add(y, ffn(rmsnorm(y, l.ffn_norm, c.norm_epsilon), l.ffn));
  }
  const Grid out = rmsnorm(y, p.dec_final_norm, c.norm_epsilon);
  const std::vector<double>& last = out.back();
  std::vector<double> logits(c.vocab_size, 0.0);
  for (int v = 0; v < c.vocab_size; ++v) {
    double s = 0.0;
    for (int j = 0; j < c.d_model; ++j) {
      s += c.tie_output_embedding ? last[j] * p.embedding(v, j) / std::sqrt(double(c.d_model))
                                  : last[j] * p.lm_head(j, v);
    }
    logits[v] = s;
  }
  return logits;
}

// Randomizes every tensor (norm scales and biases included) so no parameter
// sits at a special value.
template <typename S>
ModelParams<S> random_model(const ModelConfig& config, std::uint64_t seed,
                            double scale = 0.5) {
  ModelParams<S> p = allocate_params<S>(config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  for_each_tensor(p, [&](const std::string& name, Mat<S>& t, int rank) {
    for (long i = 0; i < t.size(); ++i) {
      double v = dist(rng);
      if (name.find("norm") != std::string::npos) v = 1.0 + 0.2 * v;
      t.data()[i] = static_cast<S>(v);
    }
  });
  return p;
}

inline ModelConfig tiny_config(int vocab = 11, FfnVariant ffn = FfnVariant::kRelu,
                               bool tied = true) {
  ModelConfig c;
  c.d_model = 8;
  c.d_ff = 16;
  c.num_layers = 1;
  c.num_heads = 2;
  c.d_kv = 4;
  c.ffn_variant = ffn;
  c.vocab_size = vocab;
  c.tie_output_embedding = tied;
  c.dropout = 0.0;
  return c;
}

template <typename S>
Mat<S> random_frames(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat<S> m(n, 255);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(u(rng));
  return m;
}

// Central differences of `loss(params)` against `analytic`, one tensor at a
// time. Returns the largest per-tensor relative error
// ||analytic - numeric|| / max(||analytic||, ||numeric||).
template <typename LossFn>
double max_gradient_error(ModelParams<double>& params, const ModelParams<double>& analytic,
                          LossFn&& loss, double step = 1e-6,
                          std::string* worst_tensor = nullptr) {
  double worst = 0.0;
  for_each_tensor_pair(params, analytic, [&](const std::string& name, Mat<double>& w,
                                             const Mat<double>& g, int) {
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (long i = 0; i < w.size(); ++i) {
      const double saved = w.data()[i];
      w.data()[i] = saved + step;
      const double up = loss(params);
      w.data()[i] = saved - step;
      const double down = loss(params);
      w.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = g.data()[i];
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
    }
    const double denom = std::max(std::sqrt(a2), std::sqrt(n2));
    const double err = denom < 1e-12 ? std::sqrt(diff2) : std::sqrt(diff2) / denom;
    if (err > worst) {
      worst = err;
      if (worst_tensor) *worst_tensor = name;
    }
  });
  return worst;
}

}  // namespace slt::testing
