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

// Pose-to-text encoder-decoder.
//
// A linear layer maps each 255-dim frame vector to d_model. The encoder and
// decoder are stacks of pre-norm residual blocks with scale-only RMS
// normalization; each stack owns one relative position bias table shared by
// all of its layers (bidirectional buckets in the encoder, causal in the
// decoder). Cross-attention carries no position bias. The decoder starts from
// the pad token. With a tied output embedding the final states are scaled by
// d_model^-1/2 before the vocabulary projection.
//
// Forward passes run one example at a time; padding never enters the model.

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "slt/attention.h"
#include "slt/model_params.h"
#include "slt/pose.h"
#include "slt/vocab.h"

namespace slt {

template <typename S>
struct EncodedSource {
  Mat<S> states;                     // [n x d_model]
  std::vector<std::uint8_t> mask;    // 1 for valid positions
};

// [frames x 255] matrix of flattened frames.
template <typename S>
Mat<S> clip_matrix(const PoseClip& clip);

// frames * W + b, frames being [n x 255].
template <typename S>
Mat<S> project_pose(const ModelParams<S>& params, const Mat<S>& frames);

// Inference-mode encoder (no dropout). Throws kEmptyInput for zero frames and
// kShape for more than max_input_frames or a wrong frame width.
template <typename S>
EncodedSource<S> encode(const ModelParams<S>& params, const Mat<S>& frames);

// Logits [len x vocab] for explicit decoder inputs (which start with pad).
template <typename S>
Mat<S> decoder_logits(const ModelParams<S>& params,
                      std::span<const TokenId> decoder_inputs,
                      const EncodedSource<S>& source);

// Next-token logits after `prefix` (the generated tokens, without the start
// symbol). An empty prefix asks for the first token.
template <typename S>
RowVec<S> decode_step(const ModelParams<S>& params,
                      std::span<const TokenId> prefix,
                      const EncodedSource<S>& source);

// Inference-mode logits [T x vocab] for every target position; row t
// conditions on targets[0, t).
template <typename S>
Mat<S> forward_teacher_forced(const ModelParams<S>& params,
                              const Mat<S>& frames,
                              std::span<const TokenId> targets);

// Decoder inputs for teacher forcing: pad followed by targets[0, T-1).
std::vector<TokenId> shift_right(std::span<const TokenId> targets);

template <typename S>
struct ForwardTape;  // activations kept for backward(); defined in seq2seq.cc

template <typename S>
class TrainingPass {
 public:
  TrainingPass();
  ~TrainingPass();
  TrainingPass(TrainingPass&&) noexcept;
  TrainingPass& operator=(TrainingPass&&) noexcept;

  // Training-mode forward pass. Dropout uses config.dropout and draws from
  // `rng`; pass nullptr to disable it (gradient checking).
  Mat<S> forward(const ModelParams<S>& params, const Mat<S>& frames,
                 std::span<const TokenId> targets, std::mt19937_64* rng);

  // Accumulates d(loss)/d(params) into `grads` given d(loss)/d(logits).
  void backward(const ModelParams<S>& params, const Mat<S>& dlogits,
                ModelParams<S>& grads) const;

 private:
  std::unique_ptr<ForwardTape<S>> tape_;
};

}  // namespace slt
