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

#include "slt/seq2seq.h"

#include <cmath>

#include "slt/error.h"

namespace slt {

template <typename S>
using ColVec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// ---------------------------------------------------------------------------
// Tape layout. Every forward helper takes an optional tape pointer; with
// nullptr it is the inference path, so training and inference share code.

template <typename S>
struct NormTape {
  Mat<S> x;
  ColVec<S> inv_rms;
};

template <typename S>
struct AttnTape {
  Mat<S> hq, hkv, q, k, v, ctx;
  std::vector<Mat<S>> probs;  // before dropout
  std::vector<Mat<S>> drop;   // empty when dropout is off
  int bias_stack = 0;         // 0 none, 1 encoder table, 2 decoder table
};

template <typename S>
struct FfnTape {
  Mat<S> h, pre, lin, mid;
  Mat<S> drop;
};

template <typename S>
struct EncoderLayerTape {
  NormTape<S> n1;
  AttnTape<S> attn;
  Mat<S> drop1;
  NormTape<S> n2;
  FfnTape<S> ffn;
  Mat<S> drop2;
};

template <typename S>
struct DecoderLayerTape {
  NormTape<S> n1;
  AttnTape<S> self_attn;
  Mat<S> drop1;
  NormTape<S> n2;
  AttnTape<S> cross_attn;
  Mat<S> drop2;
  NormTape<S> n3;
  FfnTape<S> ffn;
  Mat<S> drop3;
};

template <typename S>
struct ForwardTape {
  Mat<S> frames;
  Mat<S> drop_in;
  std::vector<int> enc_buckets;
  std::vector<int> dec_buckets;
  std::vector<EncoderLayerTape<S>> enc;
  NormTape<S> enc_norm;
  Mat<S> enc_drop;
  Mat<S> enc_out;
  std::vector<std::uint8_t> src_mask;
  std::vector<TokenId> dec_in;
  Mat<S> drop_emb;
  std::vector<DecoderLayerTape<S>> dec;
  NormTape<S> dec_norm;
  Mat<S> dec_drop;
  Mat<S> dec_out;
};

namespace {

template <typename S>
class Dropout {
 public:
  Dropout(double rate, std::mt19937_64* rng) : rate_(rate), rng_(rng) {}

  bool active() const { return rng_ != nullptr && rate_ > 0.0; }

  // Multiplier matrix with entries 0 or 1/(1-rate); empty when inactive.
  Mat<S> mask(Eigen::Index rows, Eigen::Index cols) {
    if (!active()) return {};
    Mat<S> m(rows, cols);
    const S keep = static_cast<S>(1.0 / (1.0 - rate_));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double u = static_cast<double>((*rng_)() >> 11) * 0x1.0p-53;
      m.data()[i] = u < rate_ ? S(0) : keep;
    }
    return m;
  }

  // Applies a fresh mask to x, storing it in *saved when given.
  Mat<S> apply(const Mat<S>& x, Mat<S>* saved) {
    Mat<S> m = mask(x.rows(), x.cols());
    if (saved != nullptr) *saved = m;
    if (m.size() == 0) return x;
    return x.cwiseProduct(m);
  }

 private:
  double rate_;
  std::mt19937_64* rng_;
};

template <typename S>
Mat<S> undrop(const Mat<S>& dy, const Mat<S>& mask) {
  if (mask.size() == 0) return dy;
  return dy.cwiseProduct(mask);
}

template <typename S>
S gelu(S x) {
  constexpr S k = static_cast<S>(0.7978845608028654);  // sqrt(2/pi)
  return S(0.5) * x * (S(1) + std::tanh(k * (x + S(0.044715) * x * x * x)));
}

template <typename S>
S gelu_grad(S x) {
  constexpr S k = static_cast<S>(0.7978845608028654);
  const S t = std::tanh(k * (x + S(0.044715) * x * x * x));
  return S(0.5) * (S(1) + t) +
         S(0.5) * x * (S(1) - t * t) * k * (S(1) + S(3) * S(0.044715) * x * x);
}

template <typename S>
Mat<S> rms_norm(const Mat<S>& x, const Mat<S>& scale, double eps,
                NormTape<S>* tape) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  ColVec<S> inv(n);
  Mat<S> y(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    S ss = 0;
    for (Eigen::Index j = 0; j < d; ++j) ss += x(i, j) * x(i, j);
    inv(i) = S(1) / std::sqrt(ss / static_cast<S>(d) + static_cast<S>(eps));
    for (Eigen::Index j = 0; j < d; ++j) y(i, j) = x(i, j) * inv(i) * scale(0, j);
  }
  if (tape != nullptr) {
    tape->x = x;
    tape->inv_rms = inv;
  }
  return y;
}

template <typename S>
Mat<S> rms_norm_backward(const NormTape<S>& t, const Mat<S>& scale,
                         const Mat<S>& dy, Mat<S>& dscale) {
  const Eigen::Index n = t.x.rows();
  const Eigen::Index d = t.x.cols();
  Mat<S> dx(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const S r = t.inv_rms(i);
    S dot = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const S gy = dy(i, j) * scale(0, j);
      dscale(0, j) += dy(i, j) * t.x(i, j) * r;
      dot += gy * t.x(i, j);
    }
    const S coef = r * r * r * dot / static_cast<S>(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      dx(i, j) = r * dy(i, j) * scale(0, j) - t.x(i, j) * coef;
    }
  }
  return dx;
}

template <typename S>
struct BiasContext {
  const Mat<S>* table = nullptr;
  const std::vector<int>* buckets = nullptr;
  int stack = 0;
};

template <typename S>
Mat<S> attention_forward(const AttentionWeights<S>& w, const Mat<S>& hq,
                         const Mat<S>& hkv, int heads, const BiasContext<S>& bias,
                         const AttentionMask& mask, Dropout<S>& dropout,
                         AttnTape<S>* tape) {
  Mat<S> q = matmul_rows<S>(hq, w.q);
  Mat<S> k = matmul_rows<S>(hkv, w.k);
  Mat<S> v = matmul_rows<S>(hkv, w.v);
  std::vector<Mat<S>> head_bias;
  if (bias.table != nullptr) {
    head_bias = expand_bias(*bias.table, *bias.buckets, static_cast<int>(hq.rows()),
                            static_cast<int>(hkv.rows()));
  }
  std::vector<Mat<S>> drop;
  if (dropout.active()) {
    drop.reserve(heads);
    for (int h = 0; h < heads; ++h) drop.push_back(dropout.mask(hq.rows(), hkv.rows()));
  }
  AttentionResult<S> r = attend(q, k, v, heads, head_bias, mask, &drop);
  Mat<S> out = matmul_rows<S>(r.context, w.o);
  if (tape != nullptr) {
    tape->hq = hq;
    tape->hkv = hkv;
    tape->q = std::move(q);
    tape->k = std::move(k);
    tape->v = std::move(v);
    tape->ctx = std::move(r.context);
    tape->probs = std::move(r.probs);
    tape->drop = std::move(drop);
    tape->bias_stack = bias.stack;
  }
  return out;
}

// Returns {d hq, d hkv}.
template <typename S>
std::pair<Mat<S>, Mat<S>> attention_backward(const AttnTape<S>& t,
                                             const AttentionWeights<S>& w,
                                             const Mat<S>& dout, int heads,
                                             AttentionWeights<S>& dw,
                                             Mat<S>* dtable,
                                             const std::vector<int>* buckets) {
  const Eigen::Index nq = t.q.rows();
  const Eigen::Index nk = t.k.rows();
  const Eigen::Index dk = t.q.cols() / heads;
  dw.o.noalias() += t.ctx.transpose() * dout;
  const Mat<S> dctx = dout * w.o.transpose();
  Mat<S> dq(nq, t.q.cols());
  Mat<S> dk_all(nk, t.k.cols());
  Mat<S> dv(nk, t.v.cols());
  for (int h = 0; h < heads; ++h) {
    const Mat<S>& p = t.probs[h];
    const bool dropped = !t.drop.empty();
    const Mat<S> pd = dropped ? Mat<S>(p.cwiseProduct(t.drop[h])) : p;
    const auto dc = dctx.middleCols(h * dk, dk);
    const auto vh = t.v.middleCols(h * dk, dk);
    dv.middleCols(h * dk, dk).noalias() = pd.transpose() * dc;
    Mat<S> dp = dc * vh.transpose();
    if (dropped) dp = dp.cwiseProduct(t.drop[h]);
    const ColVec<S> row_dot = dp.cwiseProduct(p).rowwise().sum();
    const Mat<S> ds = p.cwiseProduct(dp - row_dot.replicate(1, nk));
    if (dtable != nullptr) {
      for (Eigen::Index i = 0; i < nq; ++i) {
        for (Eigen::Index j = 0; j < nk; ++j) {
          (*dtable)((*buckets)[static_cast<std::size_t>(i * nk + j)], h) += ds(i, j);
        }
      }
    }
    dq.middleCols(h * dk, dk).noalias() = ds * t.k.middleCols(h * dk, dk);
    dk_all.middleCols(h * dk, dk).noalias() = ds.transpose() * t.q.middleCols(h * dk, dk);
  }
  dw.q.noalias() += t.hq.transpose() * dq;
  dw.k.noalias() += t.hkv.transpose() * dk_all;
  dw.v.noalias() += t.hkv.transpose() * dv;
  Mat<S> dhq = dq * w.q.transpose();
  Mat<S> dhkv = dk_all * w.k.transpose();
  dhkv.noalias() += dv * w.v.transpose();
  return {std::move(dhq), std::move(dhkv)};
}

template <typename S>
Mat<S> ffn_forward(const FeedForwardWeights<S>& w, const Mat<S>& h,
                   Dropout<S>& dropout, FfnTape<S>* tape) {
  Mat<S> pre = matmul_rows<S>(h, w.wi);
  Mat<S> act;
  Mat<S> lin;
  if (w.wi_gate.size() > 0) {
    lin = matmul_rows<S>(h, w.wi_gate);
    act = pre.unaryExpr([](S x) { return gelu(x); }).cwiseProduct(lin);
  } else {
    act = pre.cwiseMax(S(0));
  }
  Mat<S> drop;
  Mat<S> mid = dropout.apply(act, &drop);
  Mat<S> out = matmul_rows<S>(mid, w.wo);
  if (tape != nullptr) {
    tape->h = h;
    tape->pre = std::move(pre);
    tape->lin = std::move(lin);
    tape->mid = std::move(mid);
    tape->drop = std::move(drop);
  }
  return out;
}

template <typename S>
Mat<S> ffn_backward(const FfnTape<S>& t, const FeedForwardWeights<S>& w,
                    const Mat<S>& dout, FeedForwardWeights<S>& dw) {
  dw.wo.noalias() += t.mid.transpose() * dout;
  const Mat<S> dact = undrop<S>(dout * w.wo.transpose(), t.drop);
  if (w.wi_gate.size() > 0) {
    const Mat<S> g = t.pre.unaryExpr([](S x) { return gelu(x); });
    const Mat<S> dlin = dact.cwiseProduct(g);
    const Mat<S> dpre =
        dact.cwiseProduct(t.lin).cwiseProduct(t.pre.unaryExpr([](S x) { return gelu_grad(x); }));
    dw.wi.noalias() += t.h.transpose() * dpre;
    dw.wi_gate.noalias() += t.h.transpose() * dlin;
    Mat<S> dh = dpre * w.wi.transpose();
    dh.noalias() += dlin * w.wi_gate.transpose();
    return dh;
  }
  const Mat<S> dpre =
      dact.cwiseProduct(t.pre.unaryExpr([](S x) { return x > S(0) ? S(1) : S(0); }));
  dw.wi.noalias() += t.h.transpose() * dpre;
  return dpre * w.wi.transpose();
}

template <typename S>
void check_frames(const ModelConfig& c, const Mat<S>& frames) {
  if (frames.rows() == 0) fail(ErrorCode::kEmptyInput, "clip has no frames");
  if (frames.cols() != c.pose_dim) {
    fail(ErrorCode::kShape, "frame vectors must have " + std::to_string(c.pose_dim) +
                                " values, got " + std::to_string(frames.cols()));
  }
  if (frames.rows() > c.max_input_frames) {
    fail(ErrorCode::kShape, std::to_string(frames.rows()) +
                                " frames exceed the input cap of " +
                                std::to_string(c.max_input_frames) +
                                "; truncate upstream");
  }
}

template <typename S>
void check_tokens(const ModelConfig& c, std::span<const TokenId> ids) {
  for (TokenId id : ids) {
    if (id < 0 || id >= c.vocab_size) {
      fail(ErrorCode::kInvalidId, "token id " + std::to_string(id) +
                                      " outside vocabulary of size " +
                                      std::to_string(c.vocab_size));
    }
  }
}

template <typename S>
EncodedSource<S> run_encoder(const ModelParams<S>& p, const Mat<S>& frames,
                             Dropout<S>& dropout, ForwardTape<S>* tape) {
  const ModelConfig& c = p.config;
  check_frames(c, frames);
  const int n = static_cast<int>(frames.rows());
  std::vector<int> buckets =
      bucket_matrix(n, n, /*bidirectional=*/true, c.rel_buckets, c.rel_max_distance);
  const BiasContext<S> bias{&p.enc_rel_bias, &buckets, 1};
  const AttentionMask mask{};

  Mat<S> x = dropout.apply(project_pose(p, frames), tape ? &tape->drop_in : nullptr);
  if (tape != nullptr) {
    tape->frames = frames;
    tape->enc.resize(p.encoder.size());
  }
  for (std::size_t l = 0; l < p.encoder.size(); ++l) {
    const auto& w = p.encoder[l];
    EncoderLayerTape<S>* lt = tape ? &tape->enc[l] : nullptr;
    Mat<S> h = rms_norm(x, w.attn_norm, c.norm_epsilon, lt ? &lt->n1 : nullptr);
    Mat<S> a = attention_forward(w.self_attn, h, h, c.num_heads, bias, mask, dropout,
                                 lt ? &lt->attn : nullptr);
    x += dropout.apply(a, lt ? &lt->drop1 : nullptr);
    h = rms_norm(x, w.ffn_norm, c.norm_epsilon, lt ? &lt->n2 : nullptr);
    Mat<S> f = ffn_forward(w.ffn, h, dropout, lt ? &lt->ffn : nullptr);
    x += dropout.apply(f, lt ? &lt->drop2 : nullptr);
  }
  EncodedSource<S> out;
  out.states = dropout.apply(
      rms_norm(x, p.enc_final_norm, c.norm_epsilon, tape ? &tape->enc_norm : nullptr),
      tape ? &tape->enc_drop : nullptr);
  out.mask.assign(static_cast<std::size_t>(n), 1);
  if (tape != nullptr) {
    tape->enc_buckets = std::move(buckets);
    tape->enc_out = out.states;
    tape->src_mask = out.mask;
  }
  return out;
}

template <typename S>
Mat<S> run_decoder(const ModelParams<S>& p, std::span<const TokenId> dec_in,
                   const EncodedSource<S>& src, Dropout<S>& dropout,
                   ForwardTape<S>* tape) {
  const ModelConfig& c = p.config;
  if (dec_in.empty()) fail(ErrorCode::kEmptyInput, "decoder needs at least one input");
  if (static_cast<int>(dec_in.size()) > c.max_output_tokens) {
    fail(ErrorCode::kShape, "decoder length " + std::to_string(dec_in.size()) +
                                " exceeds the output cap of " +
                                std::to_string(c.max_output_tokens));
  }
  check_tokens<S>(c, dec_in);
  const int t_len = static_cast<int>(dec_in.size());
  const int n = static_cast<int>(src.states.rows());
  std::vector<int> buckets = bucket_matrix(t_len, t_len, /*bidirectional=*/false,
                                           c.rel_buckets, c.rel_max_distance);
  const BiasContext<S> self_bias{&p.dec_rel_bias, &buckets, 2};
  const BiasContext<S> no_bias{};
  AttentionMask causal;
  causal.causal = true;
  AttentionMask cross;
  cross.key_valid = src.mask;

  Mat<S> y(t_len, c.d_model);
  for (int t = 0; t < t_len; ++t) y.row(t) = p.embedding.row(dec_in[t]);
  y = dropout.apply(y, tape ? &tape->drop_emb : nullptr);
  if (tape != nullptr) {
    tape->dec_in.assign(dec_in.begin(), dec_in.end());
    tape->dec.resize(p.decoder.size());
  }
  for (std::size_t l = 0; l < p.decoder.size(); ++l) {
    const auto& w = p.decoder[l];
    DecoderLayerTape<S>* lt = tape ? &tape->dec[l] : nullptr;
    Mat<S> h = rms_norm(y, w.self_norm, c.norm_epsilon, lt ? &lt->n1 : nullptr);
    Mat<S> a = attention_forward(w.self_attn, h, h, c.num_heads, self_bias, causal,
                                 dropout, lt ? &lt->self_attn : nullptr);
    y += dropout.apply(a, lt ? &lt->drop1 : nullptr);
    h = rms_norm(y, w.cross_norm, c.norm_epsilon, lt ? &lt->n2 : nullptr);
    a = attention_forward(w.cross_attn, h, src.states, c.num_heads, no_bias, cross,
                          dropout, lt ? &lt->cross_attn : nullptr);
    y += dropout.apply(a, lt ? &lt->drop2 : nullptr);
    h = rms_norm(y, w.ffn_norm, c.norm_epsilon, lt ? &lt->n3 : nullptr);
    Mat<S> f = ffn_forward(w.ffn, h, dropout, lt ? &lt->ffn : nullptr);
    y += dropout.apply(f, lt ? &lt->drop3 : nullptr);
  }
  Mat<S> out = dropout.apply(
      rms_norm(y, p.dec_final_norm, c.norm_epsilon, tape ? &tape->dec_norm : nullptr),
      tape ? &tape->dec_drop : nullptr);
  if (tape != nullptr) {
    tape->dec_buckets = std::move(buckets);
    tape->dec_out = out;
  }
  (void)n;
  if (c.tie_output_embedding) {
    const Mat<S> scaled = out * static_cast<S>(1.0 / std::sqrt(static_cast<double>(c.d_model)));
    return matmul_rows_bt<S>(scaled, p.embedding);
  }
  return matmul_rows<S>(out, p.lm_head);
}

}  // namespace

template <typename S>
Mat<S> clip_matrix(const PoseClip& clip) {
  Mat<S> m(static_cast<Eigen::Index>(clip.frames.size()), kPoseDim);
  for (std::size_t f = 0; f < clip.frames.size(); ++f) {
    const FrameVector v = flatten_frame(clip.frames[f]);
    for (int j = 0; j < kPoseDim; ++j) m(static_cast<Eigen::Index>(f), j) = static_cast<S>(v[j]);
  }
  return m;
}

template <typename S>
Mat<S> project_pose(const ModelParams<S>& params, const Mat<S>& frames) {
  if (frames.cols() != params.proj_w.rows()) {
    fail(ErrorCode::kShape, "pose projection expects " +
                                std::to_string(params.proj_w.rows()) +
                                " inputs, got " + std::to_string(frames.cols()));
  }
  Mat<S> x = matmul_rows<S>(frames, params.proj_w);
  x.rowwise() += params.proj_b.row(0);
  return x;
}

template <typename S>
EncodedSource<S> encode(const ModelParams<S>& params, const Mat<S>& frames) {
  Dropout<S> off(0.0, nullptr);
  return run_encoder<S>(params, frames, off, nullptr);
}

template <typename S>
Mat<S> decoder_logits(const ModelParams<S>& params,
                      std::span<const TokenId> decoder_inputs,
                      const EncodedSource<S>& source) {
  Dropout<S> off(0.0, nullptr);
  return run_decoder<S>(params, decoder_inputs, source, off, nullptr);
}

template <typename S>
RowVec<S> decode_step(const ModelParams<S>& params, std::span<const TokenId> prefix,
                      const EncodedSource<S>& source) {
  std::vector<TokenId> inputs;
  inputs.reserve(prefix.size() + 1);
  inputs.push_back(kPadId);
  inputs.insert(inputs.end(), prefix.begin(), prefix.end());
  const Mat<S> logits = decoder_logits(params, inputs, source);
  return logits.row(logits.rows() - 1);
}

std::vector<TokenId> shift_right(std::span<const TokenId> targets) {
  std::vector<TokenId> in;
  in.reserve(targets.size());
  in.push_back(kPadId);
  for (std::size_t i = 0; i + 1 < targets.size(); ++i) in.push_back(targets[i]);
  return in;
}

template <typename S>
Mat<S> forward_teacher_forced(const ModelParams<S>& params, const Mat<S>& frames,
                              std::span<const TokenId> targets) {
  if (targets.empty()) fail(ErrorCode::kEmptyInput, "target sequence is empty");
  const EncodedSource<S> src = encode(params, frames);
  const std::vector<TokenId> in = shift_right(targets);
  return decoder_logits<S>(params, in, src);
}

template <typename S>
TrainingPass<S>::TrainingPass() = default;
template <typename S>
TrainingPass<S>::~TrainingPass() = default;
template <typename S>
TrainingPass<S>::TrainingPass(TrainingPass&&) noexcept = default;
template <typename S>
TrainingPass<S>& TrainingPass<S>::operator=(TrainingPass&&) noexcept = default;

template <typename S>
Mat<S> TrainingPass<S>::forward(const ModelParams<S>& params, const Mat<S>& frames,
                                std::span<const TokenId> targets,
                                std::mt19937_64* rng) {
  if (targets.empty()) fail(ErrorCode::kEmptyInput, "target sequence is empty");
  tape_ = std::make_unique<ForwardTape<S>>();
  Dropout<S> dropout(params.config.dropout, rng);
  const EncodedSource<S> src = run_encoder(params, frames, dropout, tape_.get());
  const std::vector<TokenId> in = shift_right(targets);
  return run_decoder<S>(params, in, src, dropout, tape_.get());
}

template <typename S>
void TrainingPass<S>::backward(const ModelParams<S>& p, const Mat<S>& dlogits,
                               ModelParams<S>& g) const {
  if (!tape_) fail(ErrorCode::kConfig, "backward() called before forward()");
  const ForwardTape<S>& t = *tape_;
  const ModelConfig& c = p.config;
  const int heads = c.num_heads;

  // Output projection.
  Mat<S> dy;
  if (c.tie_output_embedding) {
    const S s = static_cast<S>(1.0 / std::sqrt(static_cast<double>(c.d_model)));
    g.embedding.noalias() += s * (dlogits.transpose() * t.dec_out);
    dy = s * (dlogits * p.embedding);
  } else {
    g.lm_head.noalias() += t.dec_out.transpose() * dlogits;
    dy = dlogits * p.lm_head.transpose();
  }
  dy = rms_norm_backward(t.dec_norm, p.dec_final_norm, undrop(dy, t.dec_drop),
                         g.dec_final_norm);

  Mat<S> denc = Mat<S>::Zero(t.enc_out.rows(), t.enc_out.cols());
  for (std::size_t l = p.decoder.size(); l-- > 0;) {
    const auto& w = p.decoder[l];
    auto& gw = g.decoder[l];
    const auto& lt = t.dec[l];
    Mat<S> dh = ffn_backward(lt.ffn, w.ffn, undrop(dy, lt.drop3), gw.ffn);
    dy += rms_norm_backward(lt.n3, w.ffn_norm, dh, gw.ffn_norm);

    auto [dq, dkv] = attention_backward<S>(lt.cross_attn, w.cross_attn, undrop(dy, lt.drop2),
                                        heads, gw.cross_attn, nullptr, nullptr);
    denc += dkv;
    dy += rms_norm_backward(lt.n2, w.cross_norm, dq, gw.cross_norm);

    auto [sq, skv] = attention_backward(lt.self_attn, w.self_attn, undrop(dy, lt.drop1),
                                        heads, gw.self_attn, &g.dec_rel_bias,
                                        &t.dec_buckets);
    sq += skv;
    dy += rms_norm_backward(lt.n1, w.self_norm, sq, gw.self_norm);
  }
  dy = undrop(dy, t.drop_emb);
  for (std::size_t i = 0; i < t.dec_in.size(); ++i) {
    g.embedding.row(t.dec_in[i]) += dy.row(static_cast<Eigen::Index>(i));
  }

  Mat<S> dx = rms_norm_backward(t.enc_norm, p.enc_final_norm, undrop(denc, t.enc_drop),
                                g.enc_final_norm);
  for (std::size_t l = p.encoder.size(); l-- > 0;) {
    const auto& w = p.encoder[l];
    auto& gw = g.encoder[l];
    const auto& lt = t.enc[l];
    Mat<S> dh = ffn_backward(lt.ffn, w.ffn, undrop(dx, lt.drop2), gw.ffn);
    dx += rms_norm_backward(lt.n2, w.ffn_norm, dh, gw.ffn_norm);
    auto [dq, dkv] = attention_backward(lt.attn, w.self_attn, undrop(dx, lt.drop1), heads,
                                        gw.self_attn, &g.enc_rel_bias, &t.enc_buckets);
    dq += dkv;
    dx += rms_norm_backward(lt.n1, w.attn_norm, dq, gw.attn_norm);
  }
  dx = undrop(dx, t.drop_in);
  g.proj_w.noalias() += t.frames.transpose() * dx;
  g.proj_b += dx.colwise().sum();
}

#define SLT_INSTANTIATE(S)                                                          \
  template Mat<S> clip_matrix<S>(const PoseClip&);                                  \
  template Mat<S> project_pose(const ModelParams<S>&, const Mat<S>&);               \
  template EncodedSource<S> encode(const ModelParams<S>&, const Mat<S>&);           \
  template Mat<S> decoder_logits(const ModelParams<S>&, std::span<const TokenId>,   \
                                 const EncodedSource<S>&);                          \
  template RowVec<S> decode_step(const ModelParams<S>&, std::span<const TokenId>,   \
                                 const EncodedSource<S>&);                          \
  template Mat<S> forward_teacher_forced(const ModelParams<S>&, const Mat<S>&,      \
                                         std::span<const TokenId>);                 \
  template class TrainingPass<S>;
SLT_INSTANTIATE(float)
SLT_INSTANTIATE(double)
#undef SLT_INSTANTIATE

}  // namespace slt
