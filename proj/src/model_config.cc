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

#include "slt/model_config.h"

#include "slt/error.h"
#include "slt/pose.h"

namespace slt {

std::string_view ffn_variant_name(FfnVariant v) {
  return v == FfnVariant::kRelu ? "relu" : "gated-gelu";
}

FfnVariant parse_ffn_variant(std::string_view name) {
  if (name == "relu") return FfnVariant::kRelu;
  if (name == "gated-gelu") return FfnVariant::kGatedGelu;
  fail(ErrorCode::kConfig, "unknown ffn_variant '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) {
      fail(ErrorCode::kConfig, std::string(name) + " must be >= 1");
    }
  };
  positive(d_model, "d_model");
  positive(d_ff, "d_ff");
  positive(num_layers, "num_layers");
  positive(num_heads, "num_heads");
  positive(d_kv, "d_kv");
  positive(max_input_frames, "max_input_frames");
  positive(max_output_tokens, "max_output_tokens");
  positive(rel_buckets, "rel_buckets");
  positive(rel_max_distance, "rel_max_distance");
  if (pose_dim != kPoseDim) {
    fail(ErrorCode::kConfig, "pose_dim must be " + std::to_string(kPoseDim));
  }
  if (vocab_size < 3) fail(ErrorCode::kConfig, "vocab_size must be >= 3");
  if (rel_buckets < 4) fail(ErrorCode::kConfig, "rel_buckets must be >= 4");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    fail(ErrorCode::kConfig, "dropout must lie in [0, 1)");
  }
  if (!(norm_epsilon > 0.0)) fail(ErrorCode::kConfig, "norm_epsilon must be > 0");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{
      {"d_model", c.d_model},
      {"d_ff", c.d_ff},
      {"num_layers", c.num_layers},
      {"num_heads", c.num_heads},
      {"d_kv", c.d_kv},
      {"ffn_variant", std::string(ffn_variant_name(c.ffn_variant))},
      {"pose_dim", c.pose_dim},
      {"max_input_frames", c.max_input_frames},
      {"max_output_tokens", c.max_output_tokens},
      {"vocab_size", c.vocab_size},
      {"rel_buckets", c.rel_buckets},
      {"rel_max_distance", c.rel_max_distance},
      {"dropout", c.dropout},
      {"tie_output_embedding", c.tie_output_embedding},
      {"norm_epsilon", c.norm_epsilon},
  };
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  if (!j.is_object()) fail(ErrorCode::kConfig, "model config must be an object");
  auto get = [&](const char* key, auto& field) {
    if (auto it = j.find(key); it != j.end()) {
      try {
        it->get_to(field);
      } catch (const nlohmann::json::exception&) {
        fail(ErrorCode::kConfig, std::string("bad value for model.") + key);
      }
    }
  };
  get("d_model", c.d_model);
  get("d_ff", c.d_ff);
  get("num_layers", c.num_layers);
  get("num_heads", c.num_heads);
  get("d_kv", c.d_kv);
  if (auto it = j.find("ffn_variant"); it != j.end()) {
    c.ffn_variant = parse_ffn_variant(it->get<std::string>());
  }
  get("pose_dim", c.pose_dim);
  get("max_input_frames", c.max_input_frames);
  get("max_output_tokens", c.max_output_tokens);
  get("vocab_size", c.vocab_size);
  get("rel_buckets", c.rel_buckets);
  get("rel_max_distance", c.rel_max_distance);
  get("dropout", c.dropout);
  get("tie_output_embedding", c.tie_output_embedding);
  get("norm_epsilon", c.norm_epsilon);
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const char* known[] = {
        "d_model",    "d_ff",          "num_layers",        "num_heads",
        "d_kv",       "ffn_variant",   "pose_dim",          "max_input_frames",
        "max_output_tokens", "vocab_size", "rel_buckets",   "rel_max_distance",
        "dropout",    "tie_output_embedding", "norm_epsilon"};
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) fail(ErrorCode::kConfig, "unknown model config key '" + it.key() + "'");
  }
}

}  // namespace slt
