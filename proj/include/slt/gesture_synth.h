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

// Synthetic gesture language: every word is a short fixed pose template, a
// sentence is the concatenation of its words' templates plus clamped
// Gaussian jitter. Everything is a pure function of SynthConfig.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "slt/pose.h"

namespace slt {

struct SynthConfig {
  int vocab_size = 50;
  int min_len = 3;
  int max_len = 8;
  int frames_per_word = 8;
  int base_fps = 24;
  int fps = 24;  // rate of the emitted clips, <= base_fps
  double jitter_sigma = 0.01;
  int train_size = 2000;
  int dev_size = 200;
  int test_size = 200;
  std::uint64_t seed = 7;

  // Throws kConfig on any out-of-range field.
  void validate() const;
};

void to_json(nlohmann::json& j, const SynthConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, SynthConfig& c);

struct GestureLexicon {
  std::vector<std::string> words;
  // templates[w] holds frames_per_word frames at base_fps.
  std::vector<std::vector<PoseFrame>> templates;
  int frames_per_word = 0;
  int base_fps = 0;
  std::uint64_t seed = 0;

  // Index of `word`; throws kLexiconMiss when absent.
  std::size_t index_of(const std::string& word) const;
};

// Deterministic two-syllable name of word `index`; distinct for index < 4900.
std::string synth_word(int index);

// Templates linearly interpolate between two random key poses with
// coordinates in [0.05, 0.95], quantized to 1e-4. Every pair of templates is
// further apart (L2 over all frames) than 10 * jitter_sigma; kGeneration is
// thrown when that cannot be met.
GestureLexicon build_lexicon(const SynthConfig& config);

// Concatenated templates at base_fps plus N(0, sigma) jitter clamped to
// [0, 1] and quantized to 1e-4, then resampled to `fps`. The clip is
// normalized (width = height = 1) and its text is the space-joined sentence.
PoseClip render_clip(const std::vector<std::string>& sentence, const GestureLexicon& lexicon,
                     int fps, double jitter_sigma, std::uint64_t seed, std::string id = "");

struct SynthCorpus {
  GestureLexicon lexicon;
  std::vector<PoseClip> train;
  std::vector<PoseClip> dev;
  std::vector<PoseClip> test;
  std::vector<std::string> warnings;
};

// Sentences are drawn per clip from (seed, split, index). When the sentence
// space holds at least 10x the corpus size, sentences reused from an earlier
// split are redrawn so the splits are disjoint; otherwise a warning is kept.
SynthCorpus generate_corpus(const SynthConfig& config);

// Writes train.jsonl, dev.jsonl, test.jsonl and lexicon.json into `dir`.
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

void save_lexicon(const GestureLexicon& lexicon, const std::filesystem::path& path);
GestureLexicon load_lexicon(const std::filesystem::path& path);

// Template-matching decoder: splits the clip into word slots by the known
// frame layout and picks the nearest template per slot. Recovers every
// sentence of a noise-free corpus exactly.
std::string lookup_decode(const PoseClip& clip, const GestureLexicon& lexicon);

}  // namespace slt
