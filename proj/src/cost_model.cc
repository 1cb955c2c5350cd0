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

#include "slt/cost_model.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "slt/attention.h"
#include "slt/error.h"
#include "slt/tensor.h"

namespace slt {

ParamReport count_parameters(const ModelConfig& c) {
  const std::int64_t d = c.d_model;
  const std::int64_t inner = c.inner_dim();
  const std::int64_t ff = c.d_ff;
  const std::int64_t layers = c.num_layers;
  const std::int64_t ffn_mats = c.ffn_variant == FfnVariant::kRelu ? 2 : 3;
  const std::int64_t attn = 4 * d * inner;  // q, k, v: d x inner; o: inner x d
  const std::int64_t bias = static_cast<std::int64_t>(c.rel_buckets) * c.num_heads;

  ParamReport r;
  r.groups = {
      {"pose_projection", static_cast<std::int64_t>(c.pose_dim) * d + d},
      {"embedding", static_cast<std::int64_t>(c.vocab_size) * d},
      {"lm_head", c.tie_output_embedding ? 0 : d * c.vocab_size},
      {"encoder.attention", layers * attn},
      {"encoder.ffn", layers * ffn_mats * d * ff},
      {"encoder.norms", layers * 2 * d + d},
      {"encoder.relative_bias", bias},
      {"decoder.self_attention", layers * attn},
      {"decoder.cross_attention", layers * attn},
      {"decoder.ffn", layers * ffn_mats * d * ff},
      {"decoder.norms", layers * 3 * d + d},
      {"decoder.relative_bias", bias},
  };
  for (const auto& g : r.groups) r.total += g.count;
  return r;
}

AttentionFlops attention_flops(const ModelConfig& c, std::int64_t n) {
  if (n < 1) fail(ErrorCode::kConfig, "sequence length must be >= 1");
  AttentionFlops f;
  f.n = n;
  const std::int64_t inner = c.inner_dim();
  f.quadratic_per_layer = 4 * n * n * inner;
  f.projection_per_layer = 8 * n * static_cast<std::int64_t>(c.d_model) * inner;
  f.quadratic_total = f.quadratic_per_layer * c.num_layers;
  f.projection_total = f.projection_per_layer * c.num_layers;
  return f;
}

double quadratic_reduction_percent(const AttentionFlops& from, const AttentionFlops& to) {
  return 100.0 * static_cast<double>(from.quadratic_total - to.quadratic_total) /
         static_cast<double>(from.quadratic_total);
}

TradeoffReport tradeoff_report(const ModelConfig& config, const std::vector<int>& fps_list,
                               double clip_seconds) {
  if (!(clip_seconds > 0.0)) fail(ErrorCode::kConfig, "clip duration must be > 0");
  TradeoffReport r;
  r.params = count_parameters(config);
  r.clip_seconds = clip_seconds;
  for (int fps : fps_list) {
    if (fps < 1) fail(ErrorCode::kConfig, "fps must be >= 1");
    FpsRow row;
    row.fps = fps;
    row.n = std::min<std::int64_t>(config.max_input_frames,
                                   std::llround(static_cast<double>(fps) * clip_seconds));
    row.n = std::max<std::int64_t>(row.n, 1);
    row.flops = attention_flops(config, row.n);
    r.rows.push_back(row);
  }
  for (const FpsRow& a : r.rows) {
    for (const FpsRow& b : r.rows) {
      if (a.fps <= b.fps) continue;
      ReductionRow red;
      red.from_fps = a.fps;
      red.to_fps = b.fps;
      red.quadratic_reduction_percent = quadratic_reduction_percent(a.flops, b.flops);
      const auto total = [](const AttentionFlops& f) {
        return static_cast<double>(f.quadratic_total + f.projection_total);
      };
      red.total_reduction_percent = 100.0 * (1.0 - total(b.flops) / total(a.flops));
      r.reductions.push_back(red);
    }
  }
  return r;
}

namespace {

// One encoder self-attention pass as the model runs it.
struct AttentionBench {
  Mat<float> x, wq, wk, wv, wo, table;
  int heads = 0;
  int buckets = 0;
  int max_distance = 0;

  AttentionBench(const ModelConfig& c, std::int64_t n, std::uint64_t seed)
      : heads(c.num_heads), buckets(c.rel_buckets), max_distance(c.rel_max_distance) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> dist(0.0f, 0.05f);
    auto fill = [&](long r, long k) {
      Mat<float> m(r, k);
      for (long i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
      return m;
    };
    x = fill(n, c.d_model);
    wq = fill(c.d_model, c.inner_dim());
    wk = fill(c.d_model, c.inner_dim());
    wv = fill(c.d_model, c.inner_dim());
    wo = fill(c.inner_dim(), c.d_model);
    table = fill(c.rel_buckets, c.num_heads);
  }

  float run() const {
    const int n = static_cast<int>(x.rows());
    const auto b = bucket_matrix(n, n, true, buckets, max_distance);
    const auto bias = expand_bias(table, b, n, n);
    const Mat<float> q = matmul_rows<float>(x, wq);
    const Mat<float> k = matmul_rows<float>(x, wk);
    const Mat<float> v = matmul_rows<float>(x, wv);
    const Mat<float> out = attention(q, k, v, heads, bias, AttentionMask{}, wo);
    return out(0, 0);
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

TimingReport measure_attention_time(const ModelConfig& config,
                                    const std::vector<std::int64_t>& ns, int repetitions,
                                    int warmup) {
  if (repetitions < 1) fail(ErrorCode::kConfig, "repetitions must be >= 1");
  if (warmup < 0) fail(ErrorCode::kConfig, "warm-up count must be >= 0");
  if (ns.empty()) fail(ErrorCode::kConfig, "no sequence lengths given");
  const std::int64_t cap = static_cast<std::int64_t>(config.max_input_frames) * 16;
  for (std::int64_t n : ns) {
    if (n < 1 || n > cap) {
      fail(ErrorCode::kConfig, "sequence length " + std::to_string(n) + " outside [1, " +
                                   std::to_string(cap) + "]");
    }
  }
  // Samples shorter than this are repeated inside one timing.
  constexpr double kMinSampleSeconds = 1e-3;

  TimingReport report;
  report.repetitions = repetitions;
  report.warmup = warmup;
  volatile float sink = 0.0f;
  for (std::int64_t n : ns) {
    const AttentionBench bench(config, n, static_cast<std::uint64_t>(n));
    for (int i = 0; i < warmup; ++i) sink = sink + bench.run();

    TimingRow row;
    row.n = n;
    const auto probe = std::chrono::steady_clock::now();
    sink = sink + bench.run();
    const double once = seconds_since(probe);
    if (once < kMinSampleSeconds) {
      row.inner_loops = static_cast<int>(std::ceil(kMinSampleSeconds / std::max(once, 1e-7)));
      report.notes.push_back("n=" + std::to_string(n) + ": below timer resolution, " +
                             std::to_string(row.inner_loops) + " passes per sample");
    }
    std::vector<double> samples;
    for (int r = 0; r < repetitions; ++r) {
      const auto start = std::chrono::steady_clock::now();
      for (int l = 0; l < row.inner_loops; ++l) sink = sink + bench.run();
      samples.push_back(seconds_since(start) / row.inner_loops);
    }
    std::sort(samples.begin(), samples.end());
    const std::size_t m = samples.size();
    row.median_seconds = m % 2 ? samples[m / 2] : 0.5 * (samples[m / 2 - 1] + samples[m / 2]);
    report.rows.push_back(row);
  }

  const std::int64_t largest = std::max_element(report.rows.begin(), report.rows.end(),
                                                [](const TimingRow& a, const TimingRow& b) {
                                                  return a.n < b.n;
                                                })->n;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (const TimingRow& row : report.rows) {
    if (row.n * 10 < largest) continue;
    const double lx = std::log(static_cast<double>(row.n));
    const double ly = std::log(row.median_seconds);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  const double denom = count * sxx - sx * sx;
  report.fitted_exponent = count >= 2 && denom > 0 ? (count * sxy - sx * sy) / denom : 0.0;
  return report;
}

void to_json(nlohmann::json& j, const ParamReport& r) {
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& g : r.groups) groups[g.name] = g.count;
  j = nlohmann::json{{"total", r.total}, {"groups", groups}};
}

void to_json(nlohmann::json& j, const AttentionFlops& f) {
  j = nlohmann::json{{"n", f.n},
                     {"quadratic_per_layer", f.quadratic_per_layer},
                     {"projection_per_layer", f.projection_per_layer},
                     {"quadratic_total", f.quadratic_total},
                     {"projection_total", f.projection_total},
                     {"quadratic_share", f.quadratic_share()}};
}

void to_json(nlohmann::json& j, const TradeoffReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"fps", row.fps}, {"n", row.n}, {"flops", row.flops}});
  }
  nlohmann::json reds = nlohmann::json::array();
  for (const auto& red : r.reductions) {
    reds.push_back({{"from_fps", red.from_fps},
                    {"to_fps", red.to_fps},
                    {"quadratic_reduction_percent", red.quadratic_reduction_percent},
                    {"total_reduction_percent", red.total_reduction_percent}});
  }
  j = nlohmann::json{{"params", r.params},
                     {"clip_seconds", r.clip_seconds},
                     {"rows", rows},
                     {"reductions", reds}};
}

void to_json(nlohmann::json& j, const TimingReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"median_seconds", row.median_seconds},
                    {"inner_loops", row.inner_loops}});
  }
  j = nlohmann::json{{"rows", rows},
                     {"repetitions", r.repetitions},
                     {"warmup", r.warmup},
                     {"fitted_exponent", r.fitted_exponent},
                     {"notes", r.notes}};
}

std::vector<SweepEntry> config_sweep(int vocab_size) {
  std::vector<SweepEntry> out;
  for (FfnVariant ffn : {FfnVariant::kRelu, FfnVariant::kGatedGelu}) {
    for (bool tied : {true, false}) {
      for (int d_ff : {1024, 2048}) {
        for (int layers : {6, 8}) {
          for (int heads : {6, 8}) {
            ModelConfig c;
            c.vocab_size = vocab_size;
            c.ffn_variant = ffn;
            c.tie_output_embedding = tied;
            c.d_ff = d_ff;
            c.num_layers = layers;
            c.num_heads = heads;
            SweepEntry e;
            e.label = std::string(ffn_variant_name(ffn)) + (tied ? "/tied" : "/untied") +
                      "/dff" + std::to_string(d_ff) + "/L" + std::to_string(layers) + "/h" +
                      std::to_string(heads);
            e.config = c;
            e.total = count_parameters(c).total;
            out.push_back(std::move(e));
          }
        }
      }
    }
  }
  return out;
}

}  // namespace slt
