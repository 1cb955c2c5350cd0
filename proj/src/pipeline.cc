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

#include "slt/pipeline.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "slt/random.h"
#include "slt/vocab.h"

namespace slt {

void to_json(nlohmann::json& j, const PipelineConfig& c) {
  j = nlohmann::json{{"model", c.model},
                     {"train", c.train},
                     {"synth", c.synth},
                     {"fps", c.fps},
                     {"seed", c.seed},
                     {"decode",
                      {{"beam", c.decode.beam},
                       {"max_len", c.decode.max_len},
                       {"length_alpha", c.decode.length_alpha}}}};
}

void from_json(const nlohmann::json& j, PipelineConfig& c) {
  if (!j.is_object()) fail(ErrorCode::kConfig, "pipeline config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "model") from_json(value, c.model);
    else if (key == "train") from_json(value, c.train);
    else if (key == "synth") from_json(value, c.synth);
    else if (key == "fps") value.get_to(c.fps);
    else if (key == "seed") value.get_to(c.seed);
    else if (key == "decode") {
      for (const auto& [k, v] : value.items()) {
        if (k == "beam") v.get_to(c.decode.beam);
        else if (k == "max_len") v.get_to(c.decode.max_len);
        else if (k == "length_alpha") v.get_to(c.decode.length_alpha);
        else fail(ErrorCode::kConfig, "unknown decode config key '" + k + "'");
      }
    } else {
      fail(ErrorCode::kConfig, "unknown config section '" + key + "'");
    }
  }
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read config " + path.string());
  PipelineConfig c;
  try {
    from_json(nlohmann::json::parse(in), c);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfig, "bad config " + path.string() + ": " + e.what());
  }
  return c;
}

int cli_exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
      return 1;
    case ErrorCode::kNonFinite:
    case ErrorCode::kUndefinedMean:
      return 3;
    default:
      return 2;
  }
}

std::string text_hash(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return text_hash(ss.str());
}

std::vector<PoseClip> preprocess_clips(const std::vector<PoseClip>& clips,
                                       const PreprocessOptions& options, PreprocessStats* stats) {
  PreprocessStats s;
  std::vector<PoseClip> out;
  for (const PoseClip& clip : clips) {
    ++s.input;
    if (clip.fps < options.fps) {
      ++s.discarded_sub_rate;
      continue;
    }
    PoseClip c = options.normalize ? normalize_clip(clip) : clip;
    c = truncate_frames(resample_fps(c, options.fps), options.max_frames);
    if (c.truncated) ++s.truncated;
    out.push_back(std::move(c));
    ++s.kept;
  }
  if (stats) *stats = s;
  return out;
}

std::vector<PoseClip> mix_datasets(const std::vector<std::vector<PoseClip>>& sets,
                                   std::optional<double> first_weight, std::uint64_t seed) {
  std::vector<PoseClip> out;
  if (!first_weight) {
    for (const auto& set : sets) out.insert(out.end(), set.begin(), set.end());
    return out;
  }
  const double w = *first_weight;
  if (!(w >= 0.0 && w <= 1.0)) fail(ErrorCode::kConfig, "mixing weight must be in [0, 1]");
  if (sets.size() != 2) fail(ErrorCode::kConfig, "a mixing weight needs exactly two training sets");
  const std::size_t total = sets[0].size() + sets[1].size();
  const auto first = static_cast<std::size_t>(std::llround(w * static_cast<double>(total)));
  const std::size_t counts[2] = {first, total - first};
  for (std::size_t s = 0; s < 2; ++s) {
    if (counts[s] == 0) continue;
    if (sets[s].empty()) fail(ErrorCode::kConfig, "training set " + std::to_string(s + 1) + " is empty");
    std::vector<std::size_t> order(sets[s].size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = make_rng(seed, "mix", s);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < counts[s]; ++i) out.push_back(sets[s][order[i % order.size()]]);
  }
  return out;
}

TrainResult run_training(const std::vector<PoseClip>& train_clips,
                         const std::vector<PoseClip>& dev_clips, const PipelineConfig& config,
                         const std::filesystem::path& out_dir, const EpochCallback& on_epoch) {
  std::vector<std::string> texts;
  for (const PoseClip& c : train_clips) {
    if (!c.text) fail(ErrorCode::kSchema, "training clip " + c.id + " has no text");
    texts.push_back(*c.text);
  }
  const Vocab vocab = Vocab::build(texts);
  ModelConfig model = config.model;
  model.vocab_size = vocab.size();
  TrainConfig tc = config.train;
  tc.seed = config.seed;
  std::filesystem::create_directories(out_dir);
  vocab.save(out_dir / "vocab.tsv");
  tc.checkpoint_path = (out_dir / "model.ckpt").string();
  tc.log_path = (out_dir / "metrics.jsonl").string();
  return train(make_examples(train_clips, vocab, model), make_examples(dev_clips, vocab, model),
               vocab, model, tc, on_epoch);
}

std::vector<Translation> translate_clips(const Checkpoint& model,
                                         const std::vector<PoseClip>& clips,
                                         const BeamOptions& options) {
  std::vector<Translation> out;
  out.reserve(clips.size());
  for (const PoseClip& clip : clips) {
    const PoseClip capped = truncate_frames(clip, model.params.config.max_input_frames);
    const auto ids = beam_decode(model.params, clip_matrix<float>(capped), options);
    out.push_back({clip.id, decode_ids(ids, model.vocab)});
  }
  return out;
}

void save_translations(const std::vector<Translation>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  for (const Translation& t : rows) {
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["hypothesis"] = t.hypothesis;
    out << j.dump() << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

SentenceFile load_sentences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path.string());
  SentenceFile f;
  std::string line;
  std::size_t line_number = 0;
  bool structured = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (line_number == 1) structured = !line.empty() && line.front() == '{';
    if (!structured) {
      f.sentences.push_back(line);
      continue;
    }
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      f.ids.push_back(j.at("id").get<std::string>());
      if (j.contains("hypothesis")) {
        f.sentences.push_back(j["hypothesis"].get<std::string>());
      } else if (j.contains("text") && j["text"].is_string()) {
        f.sentences.push_back(j["text"].get<std::string>());
      } else {
        fail(ErrorCode::kSchema, path.string() + ":" + std::to_string(line_number) +
                                     ": record has neither hypothesis nor text");
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kParse, path.string() + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
  return f;
}

BleuReport evaluate_files(const std::filesystem::path& hyp, const std::filesystem::path& ref) {
  const SentenceFile h = load_sentences(hyp);
  const SentenceFile r = load_sentences(ref);
  if (h.ids.empty() || r.ids.empty()) return corpus_bleu(h.sentences, r.sentences);
  std::map<std::string, std::string> by_id;
  for (std::size_t i = 0; i < r.ids.size(); ++i) by_id[r.ids[i]] = r.sentences[i];
  std::vector<std::string> refs;
  for (const std::string& id : h.ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) fail(ErrorCode::kInput, "no reference for id '" + id + "'");
    refs.push_back(it->second);
  }
  if (h.ids.size() != r.ids.size()) {
    fail(ErrorCode::kInput, std::to_string(h.ids.size()) + " hypotheses for " +
                                std::to_string(r.ids.size()) + " references");
  }
  return corpus_bleu(h.sentences, refs);
}

void write_manifest(const std::filesystem::path& path, const std::string& command,
                    const nlohmann::json& config, std::uint64_t seed,
                    const std::vector<std::filesystem::path>& artifacts,
                    const std::filesystem::path& base) {
  nlohmann::ordered_json m;
  m["command"] = command;
  m["seed"] = seed;
  m["config_hash"] = text_hash(config.dump());
  m["config"] = nlohmann::ordered_json::parse(config.dump());
  m["versions"] = {{"slt", kVersion},
                   {"compiler", __VERSION__},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  for (const auto& a : artifacts) {
    files[std::filesystem::relative(a, base).generic_string()] = file_hash(a);
  }
  m["artifacts"] = files;
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write manifest " + path.string());
  out << m.dump(2) << '\n';
}

namespace {

std::string fixed2(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

std::string comparison_table(const std::vector<E2eRow>& rows) {
  std::ostringstream t;
  t << "BLEU scores on the synthetic test set\n\n"
    << "| fps | mean frames | BLEU-1 | BLEU-2 | BLEU-3 | BLEU-4 |\n"
    << "|----:|------------:|-------:|-------:|-------:|-------:|\n";
  for (const E2eRow& r : rows) {
    t << "| " << r.fps << " | " << fixed2(r.mean_frames) << " | " << fixed2(r.test.bleu[0])
      << " | " << fixed2(r.test.bleu[1]) << " | " << fixed2(r.test.bleu[2]) << " | "
      << fixed2(r.test.bleu[3]) << " |\n";
  }
  return t.str();
}

}  // namespace

E2eResult run_e2e(const PipelineConfig& config, const std::vector<int>& fps_list,
                  const std::filesystem::path& out_dir, std::ostream* log) {
  auto note = [&](const std::string& s) {
    if (log) *log << s << '\n' << std::flush;
  };
  if (fps_list.empty()) fail(ErrorCode::kConfig, "no frame rates to compare");
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> artifacts;

  SynthConfig sc = config.synth;
  sc.seed = config.seed;
  sc.fps = sc.base_fps;
  const std::filesystem::path synth_dir = out_dir / "synth";
  const SynthCorpus corpus = generate_corpus(sc);
  write_corpus(corpus, synth_dir);
  for (const char* f : {"train.jsonl", "dev.jsonl", "test.jsonl", "lexicon.json"}) {
    artifacts.push_back(synth_dir / f);
  }
  for (const auto& w : corpus.warnings) note("synth: warning: " + w);
  note("synth: " + std::to_string(corpus.train.size()) + "/" + std::to_string(corpus.dev.size()) +
       "/" + std::to_string(corpus.test.size()) + " clips");

  E2eResult result;
  for (int fps : fps_list) {
    const std::filesystem::path dir = out_dir / ("fps" + std::to_string(fps));
    std::filesystem::create_directories(dir);
    PreprocessOptions po;
    po.fps = fps;
    po.max_frames = config.model.max_input_frames;
    const auto train_clips = preprocess_clips(load_pose_dataset(synth_dir / "train.jsonl"), po);
    const auto dev_clips = preprocess_clips(load_pose_dataset(synth_dir / "dev.jsonl"), po);
    const auto test_clips = preprocess_clips(load_pose_dataset(synth_dir / "test.jsonl"), po);
    save_pose_dataset(train_clips, dir / "train.jsonl");
    save_pose_dataset(dev_clips, dir / "dev.jsonl");
    save_pose_dataset(test_clips, dir / "test.jsonl");

    E2eRow row;
    row.fps = fps;
    double frames = 0.0;
    for (const auto& c : test_clips) frames += static_cast<double>(c.frames.size());
    row.mean_frames = test_clips.empty() ? 0.0 : frames / static_cast<double>(test_clips.size());

    const TrainResult tr = run_training(train_clips, dev_clips, config, dir, [&](const EpochMetrics& m) {
      std::ostringstream s;
      s << "train[" << fps << " fps] epoch " << m.epoch << " loss " << m.train_loss;
      if (m.dev_bleu4) s << " dev_bleu4 " << *m.dev_bleu4;
      note(s.str());
    });
    row.best_epoch = tr.best_epoch;
    row.best_dev_bleu4 = tr.best_dev_bleu4.value_or(0.0);

    const Checkpoint model = load_checkpoint(dir / "model.ckpt");
    save_translations(translate_clips(model, test_clips, config.decode), dir / "translations.jsonl");
    row.test = evaluate_files(dir / "translations.jsonl", dir / "test.jsonl");
    {
      std::ofstream rep(dir / "report.json", std::ios::trunc);
      rep << nlohmann::json(row.test).dump(2) << '\n';
    }
    note("evaluate[" + std::to_string(fps) + " fps] BLEU-4 " + fixed2(row.test.bleu[3]));
    for (const char* f : {"train.jsonl", "dev.jsonl", "test.jsonl", "vocab.tsv", "model.ckpt",
                          "metrics.jsonl", "translations.jsonl", "report.json"}) {
      artifacts.push_back(dir / f);
    }
    result.rows.push_back(row);
  }

  result.table = comparison_table(result.rows);
  {
    std::ofstream md(out_dir / "comparison.md", std::ios::trunc);
    md << result.table;
    nlohmann::json rows = nlohmann::json::array();
    for (const E2eRow& r : result.rows) {
      rows.push_back({{"fps", r.fps},
                      {"mean_frames", r.mean_frames},
                      {"best_epoch", r.best_epoch},
                      {"best_dev_bleu4", r.best_dev_bleu4},
                      {"test", r.test}});
    }
    std::ofstream js(out_dir / "comparison.json", std::ios::trunc);
    js << rows.dump(2) << '\n';
  }
  artifacts.push_back(out_dir / "comparison.md");
  artifacts.push_back(out_dir / "comparison.json");
  write_manifest(out_dir / "manifest.json", "e2e", nlohmann::json(config), config.seed, artifacts,
                 out_dir);
  return result;
}

}  // namespace slt
