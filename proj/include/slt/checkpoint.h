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

// Checkpoint container:
//   8 bytes   magic "SLTCKPT1"
//   8 bytes   little-endian header length L
//   L bytes   JSON header {config, vocab_hash, vocab, tensors: [{name, shape}], meta}
//   payload   every tensor in header order as little-endian float32
// Loading checks names and shapes against the embedded config and the
// vocabulary against its hash.

#pragma once

#include <filesystem>

#include "json.hpp"
#include "slt/model_params.h"
#include "slt/vocab.h"

namespace slt {

struct Checkpoint {
  ModelParams<float> params;
  Vocab vocab;
  nlohmann::json meta = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& path, const ModelParams<float>& params,
                     const Vocab& vocab, const nlohmann::json& meta = nlohmann::json::object());

// Throws kIo when unreadable and kSchema for any inconsistency.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace slt
