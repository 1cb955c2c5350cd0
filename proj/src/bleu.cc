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

#include "slt/bleu.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "slt/error.h"

namespace slt {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// The 13a symbol class: ASCII punctuation except ' , - . and the space
// range boundary, i.e. [{-~[-` -&(-+:-@/].
bool is_13a_symbol(char c) {
  const unsigned char u = static_cast<unsigned char>(c);
  return (u >= 0x7B && u <= 0x7E) || (u >= 0x5B && u <= 0x60) ||
         (u >= 0x20 && u <= 0x26) || (u >= 0x28 && u <= 0x2B) ||
         (u >= 0x3A && u <= 0x40) || u == '/';
}

bool is_period_or_comma(char c) { return c == '.' || c == ','; }

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

// The two-character rules are applied like a left-to-right, non-overlapping
// regex substitution: a match consumes both characters.
template <typename First, typename Second, typename Emit>
std::string sub_pairs(const std::string& s, First first, Second second, Emit emit) {
  std::string out;
  out.reserve(s.size() * 2);
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && first(s[i]) && second(s[i + 1])) {
      emit(out, s[i], s[i + 1]);
      i += 2;
    } else {
      out.push_back(s[i]);
      ++i;
    }
  }
  return out;
}

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<long>(i),
                                      tokens.begin() + static_cast<long>(i) + n)];
  }
  return counts;
}

}  // namespace

std::vector<std::string> tokenize_13a(const std::string& text) {
  std::string line = text;
  replace_all(line, "<skipped>", "");
  replace_all(line, "-\n", "");
  replace_all(line, "\n", " ");
  if (line.find('&') != std::string::npos) {
    replace_all(line, "&quot;", "\"");
    replace_all(line, "&amp;", "&");
    replace_all(line, "&lt;", "<");
    replace_all(line, "&gt;", ">");
  }
  line = " " + line + " ";

  std::string spaced;
  spaced.reserve(line.size() * 3);
  for (char c : line) {
    if (is_13a_symbol(c)) {
      spaced += ' ';
      spaced += c;
      spaced += ' ';
    } else {
      spaced += c;
    }
  }
  // Period and comma split off unless preceded by a digit ...
  spaced = sub_pairs(spaced, [](char c) { return !is_digit(c); }, is_period_or_comma,
                     [](std::string& o, char a, char b) {
                       o += a;
                       o += ' ';
                       o += b;
                       o += ' ';
                     });
  // ... or followed by one.
  spaced = sub_pairs(spaced, is_period_or_comma, [](char c) { return !is_digit(c); },
                     [](std::string& o, char a, char b) {
                       o += ' ';
                       o += a;
                       o += ' ';
                       o += b;
                     });
  // A dash after a digit.
  spaced = sub_pairs(spaced, is_digit, [](char c) { return c == '-'; },
                     [](std::string& o, char a, char b) {
                       o += a;
                       o += ' ';
                       o += b;
                       o += ' ';
                     });

  std::vector<std::string> tokens;
  std::string current;
  for (char c : spaced) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

BleuReport corpus_bleu(std::span<const std::string> hypotheses,
                       std::span<const std::string> references) {
  if (hypotheses.size() != references.size()) {
    fail(ErrorCode::kInput, "hypothesis and reference counts differ: " +
                                std::to_string(hypotheses.size()) + " vs " +
                                std::to_string(references.size()));
  }
  if (hypotheses.empty()) fail(ErrorCode::kInput, "empty corpus");

  BleuReport r;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto hyp = tokenize_13a(hypotheses[s]);
    const auto ref = tokenize_13a(references[s]);
    r.hyp_length += static_cast<std::int64_t>(hyp.size());
    r.ref_length += static_cast<std::int64_t>(ref.size());
    for (int n = 1; n <= kMaxBleuOrder; ++n) {
      const NgramCounts h = count_ngrams(hyp, n);
      const NgramCounts g = count_ngrams(ref, n);
      for (const auto& [gram, count] : h) {
        r.totals[n - 1] += count;
        const auto it = g.find(gram);
        if (it != g.end()) r.matches[n - 1] += std::min(count, it->second);
      }
    }
  }

  if (r.hyp_length == 0) return r;  // every score and the penalty stay 0
  r.brevity_penalty =
      r.hyp_length < r.ref_length
          ? std::exp(1.0 - static_cast<double>(r.ref_length) / static_cast<double>(r.hyp_length))
          : 1.0;

  // Precisions after the first order with no hypothesis n-grams stay 0.
  double smooth = 1.0;
  for (int n = 0; n < kMaxBleuOrder; ++n) {
    if (r.totals[n] == 0) break;
    if (r.matches[n] == 0) {
      smooth *= 2.0;
      r.precisions[n] = 100.0 / (smooth * static_cast<double>(r.totals[n]));
    } else {
      r.precisions[n] =
          100.0 * static_cast<double>(r.matches[n]) / static_cast<double>(r.totals[n]);
    }
  }
  for (int order = 1; order <= kMaxBleuOrder; ++order) {
    double log_sum = 0.0;
    bool zero = false;
    bool perfect = r.brevity_penalty == 1.0;
    for (int n = 0; n < order; ++n) {
      if (r.precisions[n] <= 0.0) {
        zero = true;
        break;
      }
      perfect = perfect && r.matches[n] == r.totals[n];
      log_sum += std::log(r.precisions[n]);
    }
    // exp(log 100) rounds above 100; a perfect match is reported exactly.
    r.bleu[order - 1] = zero      ? 0.0
                        : perfect ? 100.0
                                  : r.brevity_penalty * std::exp(log_sum / order);
  }
  return r;
}

void to_json(nlohmann::json& j, const BleuReport& r) {
  j = nlohmann::json{{"bleu1", r.bleu[0]},
                     {"bleu2", r.bleu[1]},
                     {"bleu3", r.bleu[2]},
                     {"bleu4", r.bleu[3]},
                     {"precisions", r.precisions},
                     {"matches", r.matches},
                     {"totals", r.totals},
                     {"brevity_penalty", r.brevity_penalty},
                     {"hyp_length", r.hyp_length},
                     {"ref_length", r.ref_length}};
}

}  // namespace slt
