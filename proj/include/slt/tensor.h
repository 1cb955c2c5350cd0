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

#pragma once

#include <Eigen/Core>

namespace slt {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

template <typename S>
using ConstMatRef = Eigen::Ref<const Mat<S>, 0, Eigen::OuterStride<>>;

// out = a * b where every output row is accumulated on its own, in inner
// index order. The bits of row i depend only on row i of `a` and on `b`,
// never on how many rows `a` has; the causal decoder relies on this to be
// bit-exact under prefix extension. Zero entries of `a` are skipped.
template <typename S>
Mat<S> matmul_rows(const ConstMatRef<S>& a, const ConstMatRef<S>& b) {
  Mat<S> out = Mat<S>::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    auto row = out.row(i);
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      const S aik = a(i, k);
      if (aik == S(0)) continue;
      row.noalias() += aik * b.row(k);
    }
  }
  return out;
}

// a * b^T with the same row-independence guarantee.
template <typename S>
Mat<S> matmul_rows_bt(const ConstMatRef<S>& a, const ConstMatRef<S>& b) {
  const Mat<S> bt = b.transpose();
  return matmul_rows<S>(a, bt);
}

}  // namespace slt
