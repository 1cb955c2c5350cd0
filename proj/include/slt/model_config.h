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

#include <string>
#include <string_view>

#include "json.hpp"

namespace slt {

enum class FfnVariant { kRelu, kGatedGelu };

std::string_view ffn_variant_name(FfnVariant v);
FfnVariant parse_ffn_variant(std::string_view name);

// Architecture hyperparameters. Defaults are the compact headline
// configuration: 512-wide, 2048-wide feed-forward, 6 encoder and 6 decoder
// layers, 255-dim pose input, 256 frames in, 128 tokens out.
struct ModelConfig {
  int d_model = 512;
  int d_ff = 2048;
  int num_layers = 6;  // per stack
  int num_heads = 8;
  int d_kv = 64;
  FfnVariant ffn_variant = FfnVariant::kRelu;
  int pose_dim = 255;
  int max_input_frames = 256;
  int max_output_tokens = 128;
  int vocab_size = 32128;
  int rel_buckets = 32;
  int rel_max_distance = 128;
  double dropout = 0.1;
  bool tie_output_embedding = true;
  double norm_epsilon = 1e-6;

  int inner_dim() const { return num_heads * d_kv; }

  // Throws kConfig on any out-of-range field.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace slt
