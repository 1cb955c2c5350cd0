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

// Named random substreams. Every stochastic stage derives its generator
// from the root seed, a stage name and an index, so stages can run in any
// order or in isolation and still draw the same numbers.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace slt {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                                 std::uint64_t index = 0, std::uint64_t sub = 0) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return splitmix64(splitmix64(splitmix64(root ^ h) ^ index) ^ sub);
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::string_view stream,
                                std::uint64_t index = 0, std::uint64_t sub = 0) {
  return std::mt19937_64(derive_seed(root, stream, index, sub));
}

}  // namespace slt
