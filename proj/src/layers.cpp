#include "scnn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "scnn/error.hpp"
#include "scnn/kernels.hpp"

namespace scnn {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

// ---- Layer base ----

std::vector<Param> Layer::params() {
  std::vector<Param> out;
  out.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    out.push_back(Param{param_names_[i], &params_[i], static_cast<bool>(param_is_bias_[i])});
  }
  return out;
}

std::size_t Layer::param_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

void Layer::init_params(Prng& rng, double lo, double hi) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (param_is_bias_[i]) {
      params_[i].fill(0.0);
    } else {
      for (std::size_t k = 0; k < params_[i].size(); ++k) params_[i][k] = rng.uniform(lo, hi);
    }
  }
}

void Layer::add_param(std::string name, Tensor t, bool is_bias) {
  param_names_.push_back(std::move(name));
  param_is_bias_.push_back(is_bias);
  params_.push_back(std::move(t));
}

// ---- SwarmFilter ----

SwarmFilter::SwarmFilter(std::size_t m) {
  if (m == 0) throw ArgumentError("swarm filter: size must be >= 1");
  add_param("s", Tensor({m}));
}

std::vector<std::size_t> SwarmFilter::output_shape(const std::vector<std::size_t>& in) const {
  if (in.size() != 1) {
    throw ShapeError("swarm filter: expects rank-1 input, got " + shape_to_string(in));
  }
  return {param(0).size()};
}

Tensor SwarmFilter::forward(const Tensor& x, LayerContext& ctx) const {
  if (x.size() == 0) throw ArgumentError("swarm filter: empty input (mean of n = 0 is undefined)");
  require_rank(x, 1, "swarm filter: input");
  const double mean_x = kernels::mean(x);
  ctx.scalars.push_back(mean_x);
  ctx.scalars.push_back(static_cast<double>(x.size()));
  return kernels::scale(param(0), mean_x);
}

Tensor SwarmFilter::backward(const Tensor& g, const LayerContext& ctx) {
  const Tensor& s = param(0);
  if (g.shape() != s.shape()) {
    throw ShapeError("swarm filter backward: gradient " + g.shape_str() + " vs filter " +
                     s.shape_str());
  }
  const double mean_x = ctx.scalars[0];
  const std::size_t n = static_cast<std::size_t>(ctx.scalars[1]);
  param(0).ensure_grad();
  double* ds = param(0).grad();
  for (std::size_t j = 0; j < s.size(); ++j) ds[j] += g[j] * mean_x;
  // Every input coordinate sees the same derivative: dot(g, s) / n.
  const double q = kernels::dot(g.values(), s.values()) / static_cast<double>(n);
  Tensor dx({n});
  dx.fill(q);
  return dx;
}

// ---- Dense ----

Dense::Dense(std::size_t in, std::size_t out) : in_(in), out_(out) {
  add_param("w", Tensor({out, in}));
  add_param("b", Tensor({out}), /*is_bias=*/true);
}

std::vector<std::size_t> Dense::output_shape(const std::vector<std::size_t>& in) const {
  if (in.size() != 1 || in[0] != in_) {
    throw ShapeError("dense: expects rank-1 input of " + std::to_string(in_) + ", got " +
                     shape_to_string(in));
  }
  return {out_};
}

Tensor Dense::forward(const Tensor& x, LayerContext& ctx) const {
  Tensor y = kernels::matvec(param(0), x);
  kernels::add_inplace(y, param(1));
  ctx.tensors.push_back(x);
  return y;
}

Tensor Dense::backward(const Tensor& g, const LayerContext& ctx) {
  const Tensor& x = ctx.tensors[0];
  if (g.size() != out_) {
    throw ShapeError("dense backward: gradient " + g.shape_str() + " vs output size " +
                     std::to_string(out_));
  }
  param(0).ensure_grad();
  param(1).ensure_grad();
  kernels::add_rank1(param(0).grad_values(), g.values(), x.values());
  double* db = param(1).grad();
  for (std::size_t i = 0; i < out_; ++i) db[i] += g[i];
  Tensor dx({in_});
  kernels::matvec_transpose(param(0), g, dx);
  return dx;
}

// ---- Relu ----

std::vector<std::size_t> Relu::output_shape(const std::vector<std::size_t>& in) const {
  return in;
}

Tensor Relu::forward(const Tensor& x, LayerContext& ctx) const {
  ctx.tensors.push_back(x);
  return kernels::relu(x);
}

Tensor Relu::backward(const Tensor& g, const LayerContext& ctx) {
  const Tensor& x = ctx.tensors[0];
  kernels::detail::check_same_shape(g, x, "relu backward");
  Tensor dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? g[i] : 0.0;
  return dx;
}

// ---- Reshape ----

Reshape::Reshape(std::vector<std::size_t> target) : target_(std::move(target)) {}

std::vector<std::size_t> Reshape::output_shape(const std::vector<std::size_t>& in) const {
  std::size_t n = 1, m = 1;
  for (std::size_t d : in) n *= d;
  for (std::size_t d : target_) m *= d;
  if (n != m) {
    throw ShapeError("reshape: element count mismatch, " + shape_to_string(in) + " vs " +
                     shape_to_string(target_));
  }
  return target_;
}

Tensor Reshape::forward(const Tensor& x, LayerContext& ctx) const {
  ctx.dims = x.shape();
  return x.reshaped(target_);
}

Tensor Reshape::backward(const Tensor& g, const LayerContext& ctx) {
  return g.reshaped(ctx.dims);
}

// ---- Conv2d ----

Conv2d::Conv2d(std::size_t channels, std::size_t kh, std::size_t kw)
    : channels_(channels), kh_(kh), kw_(kw) {
  if (channels == 0 || kh == 0 || kw == 0) throw ArgumentError("conv2d: zero-sized config");
  add_param("k", Tensor({channels, kh, kw}));
  add_param("b", Tensor({channels}), /*is_bias=*/true);
}

std::vector<std::size_t> Conv2d::output_shape(const std::vector<std::size_t>& in) const {
  if (in.size() != 2) throw ShapeError("conv2d: expects rank-2 input, got " + shape_to_string(in));
  if (kh_ > in[0] || kw_ > in[1]) {
    throw ShapeError("conv2d: kernel " + std::to_string(kh_) + "x" + std::to_string(kw_) +
                     " larger than input " + shape_to_string(in));
  }
  return {channels_, kernels::conv_out_dim(in[0], kh_), kernels::conv_out_dim(in[1], kw_)};
}

Tensor Conv2d::forward(const Tensor& x, LayerContext& ctx) const {
  Tensor out(output_shape(x.shape()));
  kernels::conv2d_forward(x, param(0), param(1), out);
  ctx.tensors.push_back(x);
  return out;
}

Tensor Conv2d::backward(const Tensor& g, const LayerContext& ctx) {
  const Tensor& x = ctx.tensors[0];
  param(0).ensure_grad();
  param(1).ensure_grad();
  kernels::conv2d_param_grad(x, g, param(0).grad_values(), param(1).grad_values());
  Tensor dx(x.shape());
  kernels::conv2d_input_grad(param(0), g, dx);
  return dx;
}

// ---- MaxPool2d ----

MaxPool2d::MaxPool2d(std::size_t k) : k_(k) {
  if (k == 0) throw ArgumentError("maxpool2d: kernel size must be >= 1");
}

std::vector<std::size_t> MaxPool2d::output_shape(const std::vector<std::size_t>& in) const {
  if (in.size() != 3) {
    throw ShapeError("maxpool2d: expects rank-3 input, got " + shape_to_string(in));
  }
  return {in[0], kernels::pool_out_dim(in[1], k_), kernels::pool_out_dim(in[2], k_)};
}

Tensor MaxPool2d::forward(const Tensor& x, LayerContext& ctx) const {
  Tensor out(output_shape(x.shape()));
  std::vector<std::size_t> idx;
  kernels::maxpool2d_forward(x, k_, out, idx);
  ctx.indices = std::move(idx);
  ctx.dims = x.shape();
  return out;
}

Tensor MaxPool2d::backward(const Tensor& g, const LayerContext& ctx) {
  Tensor dx(ctx.dims);
  kernels::maxpool2d_backward(g, ctx.indices, dx);
  return dx;
}

// ---- BiLstm ----
//
// Two-bias cell, gates packed i|f|g|o along the 4h axis:
//   a   = W_ih x_t + b_ih + W_hh h_prev + b_hh
//   i,f,o = sigmoid(a parts), g = tanh(a part)
//   c_t = f (*) c_prev + i (*) g,  h_t = o (*) tanh(c_t)
// Context slots: per direction, gates [L,4h] (post-activation), cells [L,h],
// tanh(cells) [L,h], hiddens [L,h]; plus the input at slot 8.

BiLstm::BiLstm(std::size_t in, std::size_t hidden, bool return_sequences)
    : in_(in), h_(hidden), return_sequences_(return_sequences) {
  if (in == 0 || hidden == 0) throw ArgumentError("bilstm: zero-sized config");
  for (const char* dir : {"fw", "bw"}) {
    const std::string d(dir);
    add_param(d + ".w_ih", Tensor({4 * h_, in_}));
    add_param(d + ".w_hh", Tensor({4 * h_, h_}));
    add_param(d + ".b_ih", Tensor({4 * h_}), /*is_bias=*/true);
    add_param(d + ".b_hh", Tensor({4 * h_}), /*is_bias=*/true);
  }
}

std::vector<std::size_t> BiLstm::output_shape(const std::vector<std::size_t>& in) const {
  if (in.size() != 2 || in[1] != in_) {
    throw ShapeError("bilstm: expects rank-2 input [L," + std::to_string(in_) + "], got " +
                     shape_to_string(in));
  }
  if (return_sequences_) return {in[0], 2 * h_};
  return {2 * h_};
}

void BiLstm::run_direction(const Tensor& x, bool reverse, Tensor& gates, Tensor& cells,
                           Tensor& tanh_cells, Tensor& hiddens) const {
  const std::size_t L = x.dim(0);
  const std::size_t base = reverse ? 4 : 0;
  const Tensor& w_ih = param(base + 0);
  const Tensor& w_hh = param(base + 1);
  const Tensor& b_ih = param(base + 2);
  const Tensor& b_hh = param(base + 3);

  Tensor xt({in_}), hprev({h_}), cprev({h_}), a({4 * h_}), rec({4 * h_});
  for (std::size_t step = 0; step < L; ++step) {
    const std::size_t t = reverse ? L - 1 - step : step;
    std::copy_n(x.data() + t * in_, in_, xt.data());
    kernels::matvec(w_ih, xt, a);
    kernels::matvec(w_hh, hprev, rec);
    for (std::size_t k = 0; k < 4 * h_; ++k) a[k] += b_ih[k] + rec[k] + b_hh[k];

    double* gt = gates.data() + t * 4 * h_;
    double* ct = cells.data() + t * h_;
    double* tct = tanh_cells.data() + t * h_;
    double* ht = hiddens.data() + t * h_;
    for (std::size_t k = 0; k < h_; ++k) {
      const double gi = sigmoid(a[k]);
      const double gf = sigmoid(a[h_ + k]);
      const double gg = std::tanh(a[2 * h_ + k]);
      const double go = sigmoid(a[3 * h_ + k]);
      const double c = gf * cprev[k] + gi * gg;
      const double tc = std::tanh(c);
      gt[k] = gi;
      gt[h_ + k] = gf;
      gt[2 * h_ + k] = gg;
      gt[3 * h_ + k] = go;
      ct[k] = c;
      tct[k] = tc;
      ht[k] = go * tc;
    }
    std::copy_n(ct, h_, cprev.data());
    std::copy_n(ht, h_, hprev.data());
  }
}

Tensor BiLstm::forward(const Tensor& x, LayerContext& ctx) const {
  if (x.size() == 0) throw ArgumentError("bilstm: empty sequence");
  if (x.rank() != 2 || x.dim(1) != in_) {
    throw ShapeError("bilstm: expects input [L," + std::to_string(in_) + "], got " +
                     x.shape_str());
  }
  const std::size_t L = x.dim(0);
  ctx.tensors.reserve(9);
  for (bool reverse : {false, true}) {
    Tensor gates({L, 4 * h_}), cells({L, h_}), tcs({L, h_}), hs({L, h_});
    run_direction(x, reverse, gates, cells, tcs, hs);
    ctx.tensors.push_back(std::move(gates));
    ctx.tensors.push_back(std::move(cells));
    ctx.tensors.push_back(std::move(tcs));
    ctx.tensors.push_back(std::move(hs));
  }
  ctx.tensors.push_back(x);

  const Tensor& h_fw = ctx.tensors[3];
  const Tensor& h_bw = ctx.tensors[7];
  if (return_sequences_) {
    Tensor out({L, 2 * h_});
    for (std::size_t t = 0; t < L; ++t) {
      std::copy_n(h_fw.data() + t * h_, h_, out.data() + t * 2 * h_);
      std::copy_n(h_bw.data() + t * h_, h_, out.data() + t * 2 * h_ + h_);
    }
    return out;
  }
  Tensor out({2 * h_});
  std::copy_n(h_fw.data() + (L - 1) * h_, h_, out.data());
  std::copy_n(h_bw.data(), h_, out.data() + h_);
  return out;
}

void BiLstm::backprop_direction(const Tensor& x, bool reverse, const LayerContext& ctx,
                                const Tensor& g, bool seq_grad, Tensor& dx) {
  const std::size_t L = x.dim(0);
  const std::size_t pbase = reverse ? 4 : 0;
  const std::size_t tbase = reverse ? 4 : 0;
  const Tensor& gates = ctx.tensors[tbase + 0];
  const Tensor& cells = ctx.tensors[tbase + 1];
  const Tensor& tcs = ctx.tensors[tbase + 2];
  const Tensor& hs = ctx.tensors[tbase + 3];
  const Tensor& w_ih = param(pbase + 0);
  const Tensor& w_hh = param(pbase + 1);
  for (std::size_t i = 0; i < 4; ++i) param(pbase + i).ensure_grad();
  double* dw_ih = param(pbase + 0).grad();
  double* dw_hh = param(pbase + 1).grad();
  double* db_ih = param(pbase + 2).grad();
  double* db_hh = param(pbase + 3).grad();
  const std::size_t goff = reverse ? h_ : 0;  // column offset in the upstream gradient

  Tensor dh_next({h_}), dc_next({h_}), da({4 * h_}), xt({in_}), hprev({h_}), dxt({in_}),
      dhrec({h_});
  // Walk processing steps backwards; for the reverse direction that means
  // ascending input positions.
  for (std::size_t back = 0; back < L; ++back) {
    const std::size_t step = L - 1 - back;
    const std::size_t t = reverse ? L - 1 - step : step;

    Tensor dh = dh_next;
    if (seq_grad) {
      for (std::size_t k = 0; k < h_; ++k) dh[k] += g[t * 2 * h_ + goff + k];
    } else if (step == L - 1) {
      for (std::size_t k = 0; k < h_; ++k) dh[k] += g[goff + k];
    }

    const double* gt = gates.data() + t * 4 * h_;
    const double* tct = tcs.data() + t * h_;
    const bool has_prev = step > 0;
    const std::size_t tprev = reverse ? t + 1 : t - 1;
    const double* cprev = has_prev ? cells.data() + tprev * h_ : nullptr;
    const double* hprev_p = has_prev ? hs.data() + tprev * h_ : nullptr;

    for (std::size_t k = 0; k < h_; ++k) {
      const double gi = gt[k], gf = gt[h_ + k], gg = gt[2 * h_ + k], go = gt[3 * h_ + k];
      const double tc = tct[k];
      const double d_out = dh[k] * go * (1.0 - tc * tc) + dc_next[k];
      const double d_o = dh[k] * tc;
      const double d_i = d_out * gg;
      const double d_g = d_out * gi;
      const double d_f = has_prev ? d_out * cprev[k] : 0.0;
      dc_next[k] = d_out * gf;
      da[k] = d_i * gi * (1.0 - gi);
      da[h_ + k] = d_f * gf * (1.0 - gf);
      da[2 * h_ + k] = d_g * (1.0 - gg * gg);
      da[3 * h_ + k] = d_o * go * (1.0 - go);
    }

    std::copy_n(x.data() + t * in_, in_, xt.data());
    if (has_prev) {
      std::copy_n(hprev_p, h_, hprev.data());
    } else {
      hprev.fill(0.0);
    }
    kernels::add_rank1(std::span<double>(dw_ih, 4 * h_ * in_), da.values(), xt.values());
    kernels::add_rank1(std::span<double>(dw_hh, 4 * h_ * h_), da.values(), hprev.values());
    for (std::size_t k = 0; k < 4 * h_; ++k) {
      db_ih[k] += da[k];
      db_hh[k] += da[k];
    }
    kernels::matvec_transpose(w_ih, da, dxt);
    for (std::size_t k = 0; k < in_; ++k) dx[t * in_ + k] += dxt[k];
    kernels::matvec_transpose(w_hh, da, dhrec);
    dh_next = dhrec;
  }
}

Tensor BiLstm::backward(const Tensor& g, const LayerContext& ctx) {
  const Tensor& x = ctx.tensors[8];
  const std::size_t L = x.dim(0);
  if (return_sequences_) {
    if (g.rank() != 2 || g.dim(0) != L || g.dim(1) != 2 * h_) {
      throw ShapeError("bilstm backward: gradient " + g.shape_str() + " vs output [L," +
                       std::to_string(2 * h_) + "]");
    }
  } else if (g.rank() != 1 || g.dim(0) != 2 * h_) {
    throw ShapeError("bilstm backward: gradient " + g.shape_str() + " vs output [" +
                     std::to_string(2 * h_) + "]");
  }
  Tensor dx({L, in_});
  backprop_direction(x, false, ctx, g, return_sequences_, dx);
  backprop_direction(x, true, ctx, g, return_sequences_, dx);
  return dx;
}

// ---- Embedding ----

Embedding::Embedding(std::size_t vocab, std::size_t dim) : table_({vocab, dim}) {}

Tensor Embedding::forward(std::span<const std::int32_t> ids) const {
  const std::size_t L = ids.size();
  const std::size_t d = dim();
  if (L == 0) throw ArgumentError("embedding: empty id sequence");
  Tensor out({L * d});
  for (std::size_t p = 0; p < L; ++p) {
    const std::int32_t id = ids[p];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size()) {
      throw ArgumentError("embedding: token id " + std::to_string(id) + " at position " +
                          std::to_string(p) + " outside vocabulary of " +
                          std::to_string(vocab_size()));
    }
    std::copy_n(table_.data() + static_cast<std::size_t>(id) * d, d, out.data() + p * d);
  }
  return out;
}

void Embedding::backward(std::span<const std::int32_t> ids, const Tensor& g) {
  const std::size_t d = dim();
  if (g.size() != ids.size() * d) {
    throw ShapeError("embedding backward: gradient " + g.shape_str() + " vs " +
                     std::to_string(ids.size() * d) + " values");
  }
  for (std::size_t p = 0; p < ids.size(); ++p) {
    auto& row = sparse_grad_[ids[p]];
    if (row.empty()) row.assign(d, 0.0);
    const double* src = g.data() + p * d;
    for (std::size_t k = 0; k < d; ++k) row[k] += src[k];
  }
}

void Embedding::init_uniform(Prng& rng, double lo, double hi) {
  for (std::size_t i = 0; i < table_.size(); ++i) table_[i] = rng.uniform(lo, hi);
}

}  // namespace scnn
