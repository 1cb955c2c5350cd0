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
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace slt {

using TokenId = int;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kEosId = 1;
inline constexpr TokenId kUnkId = 2;
inline constexpr int kNumReservedIds = 3;
inline constexpr int kDefaultMaxOutputTokens = 128;

// Word-level vocabulary. Ids 0..2 are pad/eos/unk; words start at 3.
class Vocab {
 public:
  Vocab();

  // Words ordered by descending frequency, ties broken lexicographically.
  static Vocab build(std::span<const std::string> sentences);
  static Vocab from_words(std::vector<std::string> words);

  int size() const { return static_cast<int>(word_of_.size()); }
  TokenId id_of(const std::string& word) const;  // kUnkId when absent
  const std::string& word_of(TokenId id) const;  // throws kInvalidId
  bool contains(const std::string& word) const {
    return id_of_.count(word) != 0;
  }
  // Non-reserved words in id order.
  std::vector<std::string> words() const;

  // `id<TAB>word` lines, ids ascending, reserved rows first.
  std::string to_tsv() const;
  static Vocab from_tsv(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  // FNV-1a over to_tsv(); stored in checkpoints.
  std::uint64_t hash() const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.word_of_ == b.word_of_;
  }

 private:
  std::unordered_map<std::string, TokenId> id_of_;
  std::vector<std::string> word_of_;
};

inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kEosToken = "</s>";
inline constexpr const char* kUnkToken = "<unk>";

std::vector<std::string> split_words(const std::string& text);

// Word ids followed by eos, at most max_len ids in total.
std::vector<TokenId> encode_text(const std::string& text, const Vocab& vocab,
                                 int max_len = kDefaultMaxOutputTokens);

// Stops at the first eos, skips pad, renders unk as kUnkToken.
std::string decode_ids(std::span<const TokenId> ids, const Vocab& vocab);

}  // namespace slt
