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

// AdaFactor with an externally supplied learning rate.
//
// Tensors with more than one row and more than one column keep factored
// second moments (a row vector R and a column vector C); the rest keep a
// full second moment V. With beta_t = 1 - t^-0.8 at step t:
//   R <- beta_t R + (1 - beta_t) rowmean(g^2 + eps1), C likewise by column
//   u  = g / sqrt(R_i C_j / mean(R))
//   V <- beta_t V + (1 - beta_t) (g^2 + eps1),  u = g / sqrt(V)
//   u <- u / max(1, rms(u) / clip_threshold)
//   w <- w - lr u
// No parameter-scale factor, relative step or weight decay. Moments are
// kept in double whatever the parameter precision.

#pragma once

#include <cstdint>
#include <vector>

#include "slt/model_params.h"

namespace slt {

struct AdafactorOptions {
  double decay_exponent = 0.8;
  double eps1 = 1e-30;
  double clip_threshold = 1.0;
};

struct TensorMoments {
  bool factored = false;
  std::vector<double> row;   // factored: one entry per row
  std::vector<double> col;   // factored: one entry per column
  std::vector<double> full;  // unfactored: one entry per element
};

struct AdafactorState {
  std::int64_t step = 0;  // completed updates
  std::vector<TensorMoments> tensors;  // for_each_tensor order
};

// Zero moments for a rows x cols tensor.
TensorMoments make_moments(long rows, long cols);

template <typename S>
AdafactorState init_adafactor(const ModelParams<S>& params);

// Update of a single tensor at 1-based `step`. Computes in double and
// writes nothing when the update is not finite; returns false in that case.
template <typename S>
bool adafactor_update(Mat<S>& param, const Mat<S>& grad, TensorMoments& moments,
                      std::int64_t step, double lr, const AdafactorOptions& options = {});

// One optimizer step over every tensor. Either every tensor and moment is
// updated or, when any update is not finite, nothing is and kNonFinite is
// thrown.
template <typename S>
void adafactor_step(ModelParams<S>& params, const ModelParams<S>& grads,
                    AdafactorState& state, double lr, const AdafactorOptions& options = {});

}  // namespace slt
