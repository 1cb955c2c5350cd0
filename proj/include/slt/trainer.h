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

// Teacher-forced training: label-smoothed cross-entropy, gradient
// accumulation to an effective batch, global-norm clipping, AdaFactor and a
// linear warm-up to a constant learning rate.
//
// Examples run one at a time and their gradients are summed in batch order,
// then divided by the number of non-pad target tokens in the whole effective
// batch. The result therefore does not depend on micro_batch. Dropout noise
// for an example is drawn from (seed, step, example index).

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "slt/adafactor.h"
#include "slt/model_params.h"
#include "slt/pose.h"
#include "slt/vocab.h"

namespace slt {

struct TrainConfig {
  int epochs = 80;
  double warmup_epochs = 10.0;
  double lr_max = 1e-3;
  double weight_decay = 0.0;  // only 0 is supported
  double label_smoothing = 0.1;
  double clip_norm = 1.0;
  int effective_batch = 128;
  int micro_batch = 16;
  std::uint64_t seed = 0;
  // Stop after this many epochs without a dev improvement; 0 never stops.
  int patience = 0;
  // Stop once dev BLEU-4 reaches this value; above 100 never stops.
  double stop_at_dev_bleu = 101.0;
  // Dev examples decoded per epoch; 0 uses the whole dev set.
  int dev_limit = 0;
  // Written when non-empty: best-dev checkpoint and metrics log.
  std::string checkpoint_path;
  std::string log_path;

  // Throws kConfig on any out-of-range field.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, TrainConfig& c);

struct TrainExample {
  std::string id;
  Mat<float> frames;  // [n x 255], n <= max_input_frames
  std::vector<TokenId> targets;  // ends with eos
  std::string reference;
};

// Flattens, truncates to the model's frame cap and tokenizes. Clips without
// text are rejected with kSchema.
std::vector<TrainExample> make_examples(const std::vector<PoseClip>& clips, const Vocab& vocab,
                                        const ModelConfig& config);

struct EpochMetrics {
  int epoch = 0;
  std::int64_t step = 0;  // optimizer steps taken so far
  double lr = 0.0;        // rate used by the epoch's last step
  double train_loss = 0.0;
  std::optional<double> dev_bleu4;
  double grad_norm = 0.0;  // mean pre-clip global norm over the epoch
  std::int64_t skipped_steps = 0;  // cumulative
};

void to_json(nlohmann::json& j, const EpochMetrics& m);

struct TrainResult {
  ModelParams<float> params;  // best dev epoch, or the last one without dev data
  std::vector<EpochMetrics> log;
  int best_epoch = 0;
  std::optional<double> best_dev_bleu4;
};

// lr_max * min(1, progress / warmup_epochs).
double lr_at(double progress_epochs, const TrainConfig& config);

template <typename S>
double global_norm(const ModelParams<S>& grads);

// Scales every tensor by max_norm / norm when the global L2 norm exceeds
// max_norm. Returns the norm before scaling. Throws kNonFinite, leaving the
// tensors untouched, when any entry is NaN or infinite.
template <typename S>
double clip_gradients(std::vector<Mat<S>*> tensors, double max_norm);

template <typename S>
double clip_gradients(ModelParams<S>& grads, double max_norm);

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Throws kConfig for an empty training set or an invalid config.
TrainResult train(const std::vector<TrainExample>& train_set,
                  const std::vector<TrainExample>& dev_set, const Vocab& vocab,
                  const ModelConfig& model_config, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

}  // namespace slt
