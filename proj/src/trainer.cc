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

#include "slt/trainer.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "slt/bleu.h"
#include "slt/checkpoint.h"
#include "slt/decoding.h"
#include "slt/error.h"
#include "slt/loss.h"
#include "slt/random.h"
#include "slt/seq2seq.h"

namespace slt {

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::kConfig, "train config: " + what);
  };
  require(epochs >= 1, "epochs must be >= 1");
  require(warmup_epochs >= 0.0, "warmup_epochs must be >= 0");
  require(lr_max >= 0.0, "lr_max must be >= 0");
  require(weight_decay == 0.0, "weight_decay must be 0");
  require(label_smoothing >= 0.0 && label_smoothing < 1.0, "label_smoothing must lie in [0, 1)");
  require(clip_norm > 0.0, "clip_norm must be > 0");
  require(micro_batch >= 1, "micro_batch must be >= 1");
  require(effective_batch >= 1 && effective_batch % micro_batch == 0,
          "effective_batch must be a positive multiple of micro_batch");
  require(patience >= 0, "patience must be >= 0");
  require(dev_limit >= 0, "dev_limit must be >= 0");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"epochs", c.epochs},
                     {"warmup_epochs", c.warmup_epochs},
                     {"lr_max", c.lr_max},
                     {"weight_decay", c.weight_decay},
                     {"label_smoothing", c.label_smoothing},
                     {"clip_norm", c.clip_norm},
                     {"effective_batch", c.effective_batch},
                     {"micro_batch", c.micro_batch},
                     {"seed", c.seed},
                     {"patience", c.patience},
                     {"stop_at_dev_bleu", c.stop_at_dev_bleu},
                     {"dev_limit", c.dev_limit},
                     {"checkpoint_path", c.checkpoint_path},
                     {"log_path", c.log_path}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  for (const auto& [key, value] : j.items()) {
    if (key == "epochs") value.get_to(c.epochs);
    else if (key == "warmup_epochs") value.get_to(c.warmup_epochs);
    else if (key == "lr_max") value.get_to(c.lr_max);
    else if (key == "weight_decay") value.get_to(c.weight_decay);
    else if (key == "label_smoothing") value.get_to(c.label_smoothing);
    else if (key == "clip_norm") value.get_to(c.clip_norm);
    else if (key == "effective_batch") value.get_to(c.effective_batch);
    else if (key == "micro_batch") value.get_to(c.micro_batch);
    else if (key == "seed") value.get_to(c.seed);
    else if (key == "patience") value.get_to(c.patience);
    else if (key == "stop_at_dev_bleu") value.get_to(c.stop_at_dev_bleu);
    else if (key == "dev_limit") value.get_to(c.dev_limit);
    else if (key == "checkpoint_path") value.get_to(c.checkpoint_path);
    else if (key == "log_path") value.get_to(c.log_path);
    else fail(ErrorCode::kConfig, "unknown train config key '" + key + "'");
  }
}

void to_json(nlohmann::json& j, const EpochMetrics& m) {
  j = nlohmann::json{{"epoch", m.epoch},
                     {"step", m.step},
                     {"lr", m.lr},
                     {"train_loss", m.train_loss},
                     {"dev_bleu4", m.dev_bleu4 ? nlohmann::json(*m.dev_bleu4) : nlohmann::json()},
                     {"grad_norm", m.grad_norm},
                     {"skipped_steps", m.skipped_steps}};
}

std::vector<TrainExample> make_examples(const std::vector<PoseClip>& clips, const Vocab& vocab,
                                        const ModelConfig& config) {
  std::vector<TrainExample> out;
  out.reserve(clips.size());
  for (const PoseClip& clip : clips) {
    if (!clip.text) fail(ErrorCode::kSchema, "clip " + clip.id + " has no reference text");
    TrainExample ex;
    ex.id = clip.id;
    ex.frames = clip_matrix<float>(truncate_frames(clip, config.max_input_frames));
    ex.targets = encode_text(*clip.text, vocab, config.max_output_tokens);
    ex.reference = *clip.text;
    out.push_back(std::move(ex));
  }
  return out;
}

double lr_at(double progress_epochs, const TrainConfig& config) {
  if (config.warmup_epochs <= 0.0) return config.lr_max;
  return config.lr_max * std::min(1.0, std::max(0.0, progress_epochs) / config.warmup_epochs);
}

template <typename S>
double global_norm(const ModelParams<S>& grads) {
  double ss = 0.0;
  for_each_tensor(grads, [&](const std::string&, const Mat<S>& t, int) {
    ss += t.template cast<double>().squaredNorm();
  });
  return std::sqrt(ss);
}

template <typename S>
double clip_gradients(std::vector<Mat<S>*> tensors, double max_norm) {
  if (!(max_norm > 0.0)) fail(ErrorCode::kConfig, "max_norm must be > 0");
  double ss = 0.0;
  for (const Mat<S>* t : tensors) {
    if (!t->allFinite()) fail(ErrorCode::kNonFinite, "non-finite gradient");
    ss += t->template cast<double>().squaredNorm();
  }
  const double norm = std::sqrt(ss);
  if (!std::isfinite(norm)) fail(ErrorCode::kNonFinite, "gradient norm overflows");
  if (norm > max_norm) {
    // Dividing by norm / max_norm keeps exact ratios such as [3, 4] -> [0.6, 0.8].
    const double divisor = norm / max_norm;
    for (Mat<S>* t : tensors) {
      *t = (t->template cast<double>() / divisor).template cast<S>();
    }
  }
  return norm;
}

template <typename S>
double clip_gradients(ModelParams<S>& grads, double max_norm) {
  std::vector<Mat<S>*> tensors;
  for_each_tensor(grads, [&](const std::string&, Mat<S>& t, int) { tensors.push_back(&t); });
  return clip_gradients<S>(std::move(tensors), max_norm);
}

template double global_norm(const ModelParams<float>&);
template double global_norm(const ModelParams<double>&);
template double clip_gradients(std::vector<Mat<float>*>, double);
template double clip_gradients(std::vector<Mat<double>*>, double);
template double clip_gradients(ModelParams<float>&, double);
template double clip_gradients(ModelParams<double>&, double);

namespace {

double dev_bleu4(const ModelParams<float>& params, const std::vector<TrainExample>& dev,
                 const Vocab& vocab, int limit) {
  const std::size_t n = limit > 0 ? std::min<std::size_t>(dev.size(), limit) : dev.size();
  // Early checkpoints rarely emit eos; twice the longest target is enough
  // to score them and keeps dev decoding cheap.
  std::size_t longest = 1;
  for (std::size_t i = 0; i < n; ++i) longest = std::max(longest, dev[i].targets.size());
  const int max_len =
      std::min(params.config.max_output_tokens, static_cast<int>(2 * longest));
  std::vector<std::string> hyps;
  std::vector<std::string> refs;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ids = greedy_decode(params, dev[i].frames, max_len);
    hyps.push_back(decode_ids(ids, vocab));
    refs.push_back(dev[i].reference);
  }
  return corpus_bleu(hyps, refs).bleu[3];
}

}  // namespace

TrainResult train(const std::vector<TrainExample>& train_set,
                  const std::vector<TrainExample>& dev_set, const Vocab& vocab,
                  const ModelConfig& model_config, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  model_config.validate();
  if (train_set.empty()) fail(ErrorCode::kConfig, "training set is empty");
  if (vocab.size() != model_config.vocab_size) {
    fail(ErrorCode::kConfig, "vocabulary size " + std::to_string(vocab.size()) +
                                 " does not match model vocab_size " +
                                 std::to_string(model_config.vocab_size));
  }

  std::ofstream log_file;
  if (!config.log_path.empty()) {
    log_file.open(config.log_path, std::ios::trunc);
    if (!log_file) fail(ErrorCode::kIo, "cannot write metrics log " + config.log_path);
  }

  ModelParams<float> params = init_params<float>(model_config, derive_seed(config.seed, "init"));
  ModelParams<float> grads = zeros_like(params);
  AdafactorState opt = init_adafactor(params);

  const std::size_t n = train_set.size();
  const auto batch = static_cast<std::size_t>(config.effective_batch);
  const std::size_t steps_per_epoch = (n + batch - 1) / batch;

  TrainResult result;
  std::int64_t step = 0;
  std::int64_t skipped = 0;
  int epochs_since_best = 0;
  TrainingPass<float> pass;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    auto shuffle_rng = make_rng(config.seed, "shuffle", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    std::int64_t epoch_tokens = 0;
    double norm_sum = 0.0;
    std::int64_t norm_count = 0;
    double lr = 0.0;

    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      for_each_tensor(grads, [](const std::string&, Mat<float>& t, int) { t.setZero(); });
      double loss_sum = 0.0;
      std::int64_t tokens = 0;
      bool finite = true;
      const std::size_t end = std::min(n, (b + 1) * batch);
      for (std::size_t k = b * batch; k < end && finite; ++k) {
        const TrainExample& ex = train_set[order[k]];
        auto rng = make_rng(config.seed, "dropout", static_cast<std::uint64_t>(step), order[k]);
        const Mat<float> logits = pass.forward(params, ex.frames, ex.targets, &rng);
        const auto terms = label_smoothed_loss_terms(logits, ex.targets, config.label_smoothing);
        if (!std::isfinite(terms.sum)) {
          finite = false;
          break;
        }
        pass.backward(params, terms.grad, grads);
        loss_sum += terms.sum;
        tokens += terms.count;
      }
      lr = lr_at(static_cast<double>(step + 1) / static_cast<double>(steps_per_epoch), config);
      ++step;
      if (!finite || tokens == 0) {
        ++skipped;
        continue;
      }
      const float inv = 1.0f / static_cast<float>(tokens);
      for_each_tensor(grads, [&](const std::string&, Mat<float>& t, int) { t *= inv; });
      try {
        norm_sum += clip_gradients(grads, config.clip_norm);
        ++norm_count;
        adafactor_step(params, grads, opt, lr);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonFinite) throw;
        ++skipped;
        continue;
      }
      epoch_loss += loss_sum;
      epoch_tokens += tokens;
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.step = step;
    m.lr = lr;
    m.train_loss = epoch_tokens > 0 ? epoch_loss / static_cast<double>(epoch_tokens)
                                    : std::numeric_limits<double>::quiet_NaN();
    m.grad_norm = norm_count > 0 ? norm_sum / static_cast<double>(norm_count) : 0.0;
    m.skipped_steps = skipped;

    bool improved = dev_set.empty();
    if (!dev_set.empty()) {
      m.dev_bleu4 = dev_bleu4(params, dev_set, vocab, config.dev_limit);
      improved = !result.best_dev_bleu4 || *m.dev_bleu4 > *result.best_dev_bleu4;
    }
    if (improved) {
      result.params = params;
      result.best_epoch = epoch;
      result.best_dev_bleu4 = m.dev_bleu4;
      epochs_since_best = 0;
      if (!config.checkpoint_path.empty()) {
        save_checkpoint(config.checkpoint_path, params, vocab,
                        {{"epoch", epoch}, {"step", step}, {"train", config}});
      }
    } else {
      ++epochs_since_best;
    }

    result.log.push_back(m);
    if (log_file) log_file << nlohmann::json(m).dump() << '\n' << std::flush;
    if (on_epoch) on_epoch(m);

    if (m.dev_bleu4 && *m.dev_bleu4 >= config.stop_at_dev_bleu) break;
    if (config.patience > 0 && epochs_since_best >= config.patience) break;
  }
  return result;
}

}  // namespace slt
