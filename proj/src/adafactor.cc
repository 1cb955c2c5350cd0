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

#include "slt/adafactor.h"

#include <cmath>

#include "slt/error.h"

namespace slt {

TensorMoments make_moments(long rows, long cols) {
  TensorMoments m;
  m.factored = rows > 1 && cols > 1;
  if (m.factored) {
    m.row.assign(static_cast<std::size_t>(rows), 0.0);
    m.col.assign(static_cast<std::size_t>(cols), 0.0);
  } else {
    m.full.assign(static_cast<std::size_t>(rows * cols), 0.0);
  }
  return m;
}

template <typename S>
AdafactorState init_adafactor(const ModelParams<S>& params) {
  AdafactorState state;
  for_each_tensor(params, [&](const std::string&, const auto& t, int) {
    state.tensors.push_back(make_moments(t.rows(), t.cols()));
  });
  return state;
}

namespace {

// Computes the update and the new moments without touching the inputs.
template <typename S>
bool compute_update(const Mat<S>& grad, const TensorMoments& moments, std::int64_t step,
                    const AdafactorOptions& o, Mat<double>& update, TensorMoments& next) {
  const long rows = grad.rows();
  const long cols = grad.cols();
  const double beta = 1.0 - std::pow(static_cast<double>(step), -o.decay_exponent);
  const Mat<double> g = grad.template cast<double>();
  const Mat<double> g2 = g.array().square() + o.eps1;
  next = moments;
  update.resize(rows, cols);
  if (moments.factored) {
    double row_mean_total = 0.0;
    for (long i = 0; i < rows; ++i) {
      next.row[i] = beta * moments.row[i] + (1.0 - beta) * g2.row(i).mean();
      row_mean_total += next.row[i];
    }
    for (long j = 0; j < cols; ++j) {
      next.col[j] = beta * moments.col[j] + (1.0 - beta) * g2.col(j).mean();
    }
    const double r_mean = row_mean_total / static_cast<double>(rows);
    // rsqrt(R_i / mean(R)) * rsqrt(C_j): never forms the tiny product R_i C_j.
    for (long i = 0; i < rows; ++i) {
      const double rf = 1.0 / std::sqrt(next.row[i] / r_mean);
      for (long j = 0; j < cols; ++j) {
        update(i, j) = g(i, j) * rf / std::sqrt(next.col[j]);
      }
    }
  } else {
    for (long k = 0; k < g.size(); ++k) {
      next.full[k] = beta * moments.full[k] + (1.0 - beta) * g2.data()[k];
      update.data()[k] = g.data()[k] / std::sqrt(next.full[k]);
    }
  }
  const double rms = std::sqrt(update.array().square().mean());
  update /= std::max(1.0, rms / o.clip_threshold);
  return update.allFinite();
}

}  // namespace

template <typename S>
bool adafactor_update(Mat<S>& param, const Mat<S>& grad, TensorMoments& moments,
                      std::int64_t step, double lr, const AdafactorOptions& options) {
  Mat<double> update;
  TensorMoments next;
  if (!compute_update(grad, moments, step, options, update, next)) return false;
  param = (param.template cast<double>() - lr * update).template cast<S>();
  moments = std::move(next);
  return true;
}

template <typename S>
void adafactor_step(ModelParams<S>& params, const ModelParams<S>& grads,
                    AdafactorState& state, double lr, const AdafactorOptions& options) {
  if (!(lr >= 0.0)) fail(ErrorCode::kConfig, "learning rate must be non-negative");
  const std::int64_t step = state.step + 1;
  std::vector<Mat<double>> updates;
  std::vector<TensorMoments> next;
  std::size_t i = 0;
  for_each_tensor_pair(params, grads, [&](const std::string& name, Mat<S>&, const Mat<S>& g,
                                          int) {
    if (i >= state.tensors.size()) fail(ErrorCode::kShape, "optimizer state has too few tensors");
    Mat<double> u;
    TensorMoments m;
    if (!compute_update(g, state.tensors[i], step, options, u, m)) {
      fail(ErrorCode::kNonFinite, "non-finite optimizer update for " + name);
    }
    updates.push_back(std::move(u));
    next.push_back(std::move(m));
    ++i;
  });
  i = 0;
  for_each_tensor(params, [&](const std::string&, Mat<S>& w, int) {
    w = (w.template cast<double>() - lr * updates[i]).template cast<S>();
    ++i;
  });
  state.tensors = std::move(next);
  state.step = step;
}

#define SLT_INSTANTIATE(S)                                                                  \
  template AdafactorState init_adafactor(const ModelParams<S>&);                            \
  template bool adafactor_update(Mat<S>&, const Mat<S>&, TensorMoments&, std::int64_t,      \
                                 double, const AdafactorOptions&);                          \
  template void adafactor_step(ModelParams<S>&, const ModelParams<S>&, AdafactorState&,     \
                               double, const AdafactorOptions&);
SLT_INSTANTIATE(float)
SLT_INSTANTIATE(double)
#undef SLT_INSTANTIATE

}  // namespace slt
