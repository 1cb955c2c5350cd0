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

// Stage functions behind the command-line tool: synth, preprocess, train,
// translate, evaluate, analyze and the end-to-end frame-rate comparison.
// Each stage reads and writes plain files so stages compose by hand exactly
// as e2e composes them.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "slt/bleu.h"
#include "slt/checkpoint.h"
#include "slt/decoding.h"
#include "slt/error.h"
#include "slt/gesture_synth.h"
#include "slt/model_config.h"
#include "slt/trainer.h"

namespace slt {

inline constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
  ModelConfig model;  // vocab_size is replaced by the training vocabulary's size
  TrainConfig train;
  SynthConfig synth;
  int fps = 24;
  std::uint64_t seed = 7;  // root of every stage's random streams
  BeamOptions decode;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
// Sections and keys may be omitted; unknown keys are rejected with kConfig.
void from_json(const nlohmann::json& j, PipelineConfig& c);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// 0 success, 1 usage, 2 data, 3 training or numeric failure.
int cli_exit_code(ErrorCode code);

// FNV-1a of the file contents, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);
std::string text_hash(const std::string& text);

struct PreprocessOptions {
  int fps = 24;
  int max_frames = kDefaultMaxFrames;
  bool normalize = true;
};

struct PreprocessStats {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t discarded_sub_rate = 0;
  std::size_t truncated = 0;
};

// normalize -> resample -> truncate. Clips recorded below the target rate
// are dropped and counted.
std::vector<PoseClip> preprocess_clips(const std::vector<PoseClip>& clips,
                                       const PreprocessOptions& options,
                                       PreprocessStats* stats = nullptr);

// Builds the vocabulary from the training texts and trains. Writes
// vocab.tsv, model.ckpt (best dev epoch) and metrics.jsonl into `out_dir`.
// Training sets are concatenated when `first_weight` is empty. Otherwise
// exactly two sets are required and the result keeps their combined size,
// round(first_weight * size) clips drawn from the first set and the rest from
// the second, each by cycling a seeded permutation. Throws kConfig for a
// weight outside [0, 1], a set count other than two, or an empty set that
// must contribute clips.
std::vector<PoseClip> mix_datasets(const std::vector<std::vector<PoseClip>>& sets,
                                   std::optional<double> first_weight, std::uint64_t seed);

TrainResult run_training(const std::vector<PoseClip>& train_clips,
                         const std::vector<PoseClip>& dev_clips, const PipelineConfig& config,
                         const std::filesystem::path& out_dir,
                         const EpochCallback& on_epoch = {});

struct Translation {
  std::string id;
  std::string hypothesis;
};

std::vector<Translation> translate_clips(const Checkpoint& model,
                                         const std::vector<PoseClip>& clips,
                                         const BeamOptions& options);
void save_translations(const std::vector<Translation>& rows, const std::filesystem::path& path);

// Sentences from a translate output ({id, hypothesis}), a pose dataset
// ({id, text, ...}) or plain text (one sentence per line, no ids).
struct SentenceFile {
  std::vector<std::string> ids;  // empty for plain text
  std::vector<std::string> sentences;
};
SentenceFile load_sentences(const std::filesystem::path& path);

// Pairs by id when both sides carry ids, by line otherwise.
BleuReport evaluate_files(const std::filesystem::path& hyp, const std::filesystem::path& ref);

struct E2eRow {
  int fps = 0;
  double mean_frames = 0.0;
  int best_epoch = 0;
  double best_dev_bleu4 = 0.0;
  BleuReport test;
};

struct E2eResult {
  std::vector<E2eRow> rows;
  std::string table;  // markdown comparison table
};

// synth at base rate -> preprocess per fps -> train -> beam translate test
// -> BLEU. Writes every artifact, comparison.md/json and manifest.json under
// `out_dir`. Progress lines go to `log` when given.
E2eResult run_e2e(const PipelineConfig& config, const std::vector<int>& fps_list,
                  const std::filesystem::path& out_dir, std::ostream* log = nullptr);

// Reproducibility record: command, config and its hash, seed, versions and
// the hash of every listed artifact.
void write_manifest(const std::filesystem::path& path, const std::string& command,
                    const nlohmann::json& config, std::uint64_t seed,
                    const std::vector<std::filesystem::path>& artifacts,
                    const std::filesystem::path& base);

// Command-line entry point; returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace slt
