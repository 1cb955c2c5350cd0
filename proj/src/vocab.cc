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

#include "slt/vocab.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "slt/error.h"

namespace slt {

Vocab::Vocab() : word_of_{kPadToken, kEosToken, kUnkToken} {}

Vocab Vocab::from_words(std::vector<std::string> words) {
  Vocab v;
  for (auto& w : words) {
    if (w.empty() || v.id_of_.count(w)) {
      fail(ErrorCode::kInput, "duplicate or empty vocabulary word '" + w + "'");
    }
    v.id_of_.emplace(w, static_cast<TokenId>(v.word_of_.size()));
    v.word_of_.push_back(std::move(w));
  }
  return v;
}

Vocab Vocab::build(std::span<const std::string> sentences) {
  std::map<std::string, long> counts;
  for (const auto& s : sentences) {
    for (auto& w : split_words(s)) ++counts[w];
  }
  std::vector<std::pair<std::string, long>> ranked(counts.begin(),
                                                   counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  std::vector<std::string> words;
  words.reserve(ranked.size());
  for (auto& [w, _] : ranked) words.push_back(w);
  return from_words(std::move(words));
}

TokenId Vocab::id_of(const std::string& word) const {
  auto it = id_of_.find(word);
  return it == id_of_.end() ? kUnkId : it->second;
}

const std::string& Vocab::word_of(TokenId id) const {
  if (id < 0 || id >= size()) {
    fail(ErrorCode::kInvalidId, "token id " + std::to_string(id) +
                                    " outside vocabulary of size " +
                                    std::to_string(size()));
  }
  return word_of_[id];
}

std::vector<std::string> Vocab::words() const {
  return {word_of_.begin() + kNumReservedIds, word_of_.end()};
}

std::string Vocab::to_tsv() const {
  std::string out;
  for (std::size_t i = 0; i < word_of_.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += word_of_[i];
    out += '\n';
  }
  return out;
}

Vocab Vocab::from_tsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> words;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorCode::kParse,
           "vocab line " + std::to_string(line_number) + ": missing tab");
    }
    const std::string id_text = line.substr(0, tab);
    const std::string word = line.substr(tab + 1);
    const std::size_t expected = words.size();
    if (id_text != std::to_string(expected)) {
      fail(ErrorCode::kParse, "vocab line " + std::to_string(line_number) +
                                  ": expected id " + std::to_string(expected));
    }
    words.push_back(word);
  }
  if (words.size() < static_cast<std::size_t>(kNumReservedIds) ||
      words[kPadId] != kPadToken || words[kEosId] != kEosToken ||
      words[kUnkId] != kUnkToken) {
    fail(ErrorCode::kSchema, "vocab file is missing the reserved rows");
  }
  words.erase(words.begin(), words.begin() + kNumReservedIds);
  return from_words(std::move(words));
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write vocab " + path.string());
  out << to_tsv();
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read vocab " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_tsv(ss.str());
}

std::uint64_t Vocab::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : to_tsv()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::vector<TokenId> encode_text(const std::string& text, const Vocab& vocab,
                                 int max_len) {
  if (max_len < 1) fail(ErrorCode::kConfig, "max_len must be >= 1");
  std::vector<TokenId> ids;
  for (const auto& w : split_words(text)) {
    if (static_cast<int>(ids.size()) == max_len - 1) break;
    ids.push_back(vocab.id_of(w));
  }
  ids.push_back(kEosId);
  return ids;
}

std::string decode_ids(std::span<const TokenId> ids, const Vocab& vocab) {
  std::string out;
  for (TokenId id : ids) {
    if (id == kEosId) break;
    const std::string& w = vocab.word_of(id);
    if (id == kPadId) continue;
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace slt
