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

#include "slt/gesture_synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "slt/error.h"
#include "slt/random.h"

namespace slt {
namespace {

constexpr const char* kConsonants = "bdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";
constexpr int kSyllables = 14 * 5;
constexpr int kMaxTemplateAttempts = 1000;

double quantize(double v) { return std::round(v * 1e4) / 1e4; }

std::string syllable(int i) {
  return std::string{kConsonants[i / 5], kVowels[i % 5]};
}

double template_distance(const std::vector<PoseFrame>& a, const std::vector<PoseFrame>& b) {
  double ss = 0.0;
  for (std::size_t f = 0; f < a.size(); ++f) {
    for (int k = 0; k < kNumKeypoints; ++k) {
      const double dx = a[f][k].x - b[f][k].x;
      const double dy = a[f][k].y - b[f][k].y;
      const double dz = a[f][k].z - b[f][k].z;
      ss += dx * dx + dy * dy + dz * dz;
    }
  }
  return std::sqrt(ss);
}

std::vector<PoseFrame> random_template(std::mt19937_64& rng, int frames) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  PoseFrame a, b;
  for (int k = 0; k < kNumKeypoints; ++k) {
    a[k] = {u(rng), u(rng), u(rng)};
    b[k] = {u(rng), u(rng), u(rng)};
  }
  std::vector<PoseFrame> out(static_cast<std::size_t>(frames));
  for (int f = 0; f < frames; ++f) {
    const double t = frames == 1 ? 0.0 : static_cast<double>(f) / (frames - 1);
    for (int k = 0; k < kNumKeypoints; ++k) {
      out[f][k] = {quantize(a[k].x + t * (b[k].x - a[k].x)),
                   quantize(a[k].y + t * (b[k].y - a[k].y)),
                   quantize(a[k].z + t * (b[k].z - a[k].z))};
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) s += ' ';
    s += words[i];
  }
  return s;
}

// Number of distinct sentences, saturating at `cap`.
double sentence_space(int vocab, int min_len, int max_len, double cap) {
  double total = 0.0;
  for (int len = min_len; len <= max_len && total < cap; ++len) {
    total += std::pow(static_cast<double>(vocab), len);
  }
  return std::min(total, cap);
}

std::vector<std::string> draw_sentence(const SynthConfig& c, const GestureLexicon& lex,
                                       std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len_dist(c.min_len, c.max_len);
  std::uniform_int_distribution<int> word_dist(0, c.vocab_size - 1);
  const int len = len_dist(rng);
  std::vector<std::string> words;
  for (int i = 0; i < len; ++i) words.push_back(lex.words[word_dist(rng)]);
  return words;
}

}  // namespace

void SynthConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::kConfig, "synth config: " + what);
  };
  require(vocab_size >= 2, "vocab_size must be >= 2");
  require(vocab_size <= kSyllables * kSyllables, "vocab_size must be <= 4900");
  require(min_len >= 1 && max_len >= min_len, "sentence length range must satisfy 1 <= min <= max");
  require(frames_per_word >= 1, "frames_per_word must be >= 1");
  require(base_fps >= 1, "base_fps must be >= 1");
  require(fps >= 1 && fps <= base_fps, "fps must lie in [1, base_fps]");
  require(jitter_sigma >= 0.0, "jitter_sigma must be >= 0");
  require(train_size >= 0 && dev_size >= 0 && test_size >= 0, "corpus sizes must be >= 0");
}

void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = nlohmann::json{{"vocab_size", c.vocab_size},         {"min_len", c.min_len},
                     {"max_len", c.max_len},               {"frames_per_word", c.frames_per_word},
                     {"base_fps", c.base_fps},             {"fps", c.fps},
                     {"jitter_sigma", c.jitter_sigma},     {"train_size", c.train_size},
                     {"dev_size", c.dev_size},             {"test_size", c.test_size},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
  for (const auto& [key, value] : j.items()) {
    if (key == "vocab_size") value.get_to(c.vocab_size);
    else if (key == "min_len") value.get_to(c.min_len);
    else if (key == "max_len") value.get_to(c.max_len);
    else if (key == "frames_per_word") value.get_to(c.frames_per_word);
    else if (key == "base_fps") value.get_to(c.base_fps);
    else if (key == "fps") value.get_to(c.fps);
    else if (key == "jitter_sigma") value.get_to(c.jitter_sigma);
    else if (key == "train_size") value.get_to(c.train_size);
    else if (key == "dev_size") value.get_to(c.dev_size);
    else if (key == "test_size") value.get_to(c.test_size);
    else if (key == "seed") value.get_to(c.seed);
    else fail(ErrorCode::kConfig, "unknown synth config key '" + key + "'");
  }
}

std::size_t GestureLexicon::index_of(const std::string& word) const {
  const auto it = std::find(words.begin(), words.end(), word);
  if (it == words.end()) fail(ErrorCode::kLexiconMiss, "word '" + word + "' is not in the lexicon");
  return static_cast<std::size_t>(it - words.begin());
}

std::string synth_word(int index) {
  // index = 70a + b maps to (b, (a + 3b) mod 70), a bijection on [0, 4900).
  const int a = index / kSyllables;
  const int b = index % kSyllables;
  return syllable(b) + syllable((a + 3 * b) % kSyllables);
}

GestureLexicon build_lexicon(const SynthConfig& config) {
  config.validate();
  GestureLexicon lex;
  lex.frames_per_word = config.frames_per_word;
  lex.base_fps = config.base_fps;
  lex.seed = config.seed;
  const double min_distance = 10.0 * config.jitter_sigma;
  auto rng = make_rng(config.seed, "lexicon");
  for (int w = 0; w < config.vocab_size; ++w) {
    lex.words.push_back(synth_word(w));
    bool placed = false;
    for (int attempt = 0; attempt < kMaxTemplateAttempts && !placed; ++attempt) {
      auto candidate = random_template(rng, config.frames_per_word);
      placed = std::all_of(lex.templates.begin(), lex.templates.end(), [&](const auto& t) {
        return template_distance(t, candidate) > min_distance;
      });
      if (placed) lex.templates.push_back(std::move(candidate));
    }
    if (!placed) {
      fail(ErrorCode::kGeneration,
           "cannot place " + std::to_string(config.vocab_size) +
               " templates more than 10 * jitter_sigma apart; raise frames_per_word or "
               "lower jitter_sigma or vocab_size");
    }
  }
  return lex;
}

PoseClip render_clip(const std::vector<std::string>& sentence, const GestureLexicon& lexicon,
                     int fps, double jitter_sigma, std::uint64_t seed, std::string id) {
  PoseClip clip;
  clip.id = std::move(id);
  clip.fps = lexicon.base_fps;
  clip.width = 1;
  clip.height = 1;
  clip.text = join(sentence);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, jitter_sigma > 0.0 ? jitter_sigma : 1.0);
  auto jitter = [&](double v) {
    if (jitter_sigma <= 0.0) return v;
    return quantize(std::clamp(v + noise(rng), 0.0, 1.0));
  };
  for (const std::string& word : sentence) {
    for (const PoseFrame& f : lexicon.templates[lexicon.index_of(word)]) {
      PoseFrame out;
      for (int k = 0; k < kNumKeypoints; ++k) {
        out[k] = {jitter(f[k].x), jitter(f[k].y), jitter(f[k].z)};
      }
      clip.frames.push_back(out);
    }
  }
  return resample_fps(clip, fps);
}

SynthCorpus generate_corpus(const SynthConfig& config) {
  config.validate();
  SynthCorpus corpus;
  corpus.lexicon = build_lexicon(config);
  const double total =
      static_cast<double>(config.train_size) + config.dev_size + config.test_size;
  const bool disjoint =
      sentence_space(config.vocab_size, config.min_len, config.max_len, 10.0 * total + 1.0) >=
      10.0 * total;
  if (!disjoint && total > 0) {
    corpus.warnings.push_back(
        "sentence space is smaller than 10x the corpus size; splits may share sentences");
  }

  std::set<std::string> earlier;  // sentences of the splits already generated
  struct Split {
    const char* name;
    int size;
    std::vector<PoseClip>* out;
  };
  const Split splits[] = {{"train", config.train_size, &corpus.train},
                          {"dev", config.dev_size, &corpus.dev},
                          {"test", config.test_size, &corpus.test}};
  for (const Split& split : splits) {
    std::set<std::string> mine;
    for (int i = 0; i < split.size; ++i) {
      auto rng = make_rng(config.seed, std::string("sentence.") + split.name,
                          static_cast<std::uint64_t>(i));
      auto sentence = draw_sentence(config, corpus.lexicon, rng);
      while (disjoint && earlier.count(join(sentence))) {
        sentence = draw_sentence(config, corpus.lexicon, rng);
      }
      mine.insert(join(sentence));
      const std::string id = std::string(split.name) + "-" + std::to_string(i);
      split.out->push_back(render_clip(sentence, corpus.lexicon, config.fps, config.jitter_sigma,
                                       derive_seed(config.seed, std::string("jitter.") + split.name,
                                                   static_cast<std::uint64_t>(i)),
                                       id));
    }
    earlier.insert(mine.begin(), mine.end());
  }
  return corpus;
}

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_pose_dataset(corpus.train, dir / "train.jsonl");
  save_pose_dataset(corpus.dev, dir / "dev.jsonl");
  save_pose_dataset(corpus.test, dir / "test.jsonl");
  save_lexicon(corpus.lexicon, dir / "lexicon.json");
}

void save_lexicon(const GestureLexicon& lexicon, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["seed"] = lexicon.seed;
  j["frames_per_word"] = lexicon.frames_per_word;
  j["base_fps"] = lexicon.base_fps;
  j["words"] = lexicon.words;
  nlohmann::ordered_json templates = nlohmann::ordered_json::array();
  for (const auto& t : lexicon.templates) {
    nlohmann::ordered_json frames = nlohmann::ordered_json::array();
    for (const PoseFrame& f : t) {
      nlohmann::ordered_json kps = nlohmann::ordered_json::array();
      for (const Keypoint& k : f) kps.push_back({k.x, k.y, k.z});
      frames.push_back(std::move(kps));
    }
    templates.push_back(std::move(frames));
  }
  j["templates"] = std::move(templates);
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write lexicon " + path.string());
  out << j.dump() << '\n';
}

GestureLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open lexicon " + path.string());
  GestureLexicon lex;
  try {
    const auto j = nlohmann::json::parse(in);
    lex.seed = j.at("seed").get<std::uint64_t>();
    lex.frames_per_word = j.at("frames_per_word").get<int>();
    lex.base_fps = j.at("base_fps").get<int>();
    lex.words = j.at("words").get<std::vector<std::string>>();
    for (const auto& t : j.at("templates")) {
      std::vector<PoseFrame> frames;
      for (const auto& f : t) {
        if (f.size() != kNumKeypoints) fail(ErrorCode::kSchema, "lexicon frame is not 85 keypoints");
        PoseFrame frame;
        for (int k = 0; k < kNumKeypoints; ++k) {
          frame[k] = {f[k].at(0).get<double>(), f[k].at(1).get<double>(), f[k].at(2).get<double>()};
        }
        frames.push_back(frame);
      }
      lex.templates.push_back(std::move(frames));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, "bad lexicon " + path.string() + ": " + e.what());
  }
  if (lex.templates.size() != lex.words.size()) {
    fail(ErrorCode::kSchema, "lexicon has " + std::to_string(lex.words.size()) + " words but " +
                                 std::to_string(lex.templates.size()) + " templates");
  }
  return lex;
}

std::string lookup_decode(const PoseClip& clip, const GestureLexicon& lexicon) {
  const int g = lexicon.frames_per_word;
  if (clip.frames.empty() || lexicon.words.empty()) return "";
  // Smallest word count whose base-rate rendering resamples to this length.
  const auto len = clip.frames.size();
  std::size_t words = 0;
  for (std::size_t k = 1; k <= len * static_cast<std::size_t>(lexicon.base_fps); ++k) {
    if (resample_indices(k * g, lexicon.base_fps, clip.fps).size() >= len) {
      words = k;
      break;
    }
  }
  if (words == 0) return "";
  const auto source = resample_indices(words * g, lexicon.base_fps, clip.fps);

  std::vector<std::string> out;
  for (std::size_t w = 0; w < words; ++w) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < lexicon.templates.size(); ++t) {
      double d = 0.0;
      for (std::size_t i = 0; i < len && i < source.size(); ++i) {
        if (source[i] / g != w) continue;
        const PoseFrame& want = lexicon.templates[t][source[i] % g];
        for (int k = 0; k < kNumKeypoints; ++k) {
          const double dx = clip.frames[i][k].x - want[k].x;
          const double dy = clip.frames[i][k].y - want[k].y;
          const double dz = clip.frames[i][k].z - want[k].z;
          d += dx * dx + dy * dy + dz * dz;
        }
      }
      if (d < best_d) {
        best_d = d;
        best = t;
      }
    }
    out.push_back(lexicon.words[best]);
  }
  return join(out);
}

}  // namespace slt
