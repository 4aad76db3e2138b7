#include <algorithm>
#include <cmath>

#include "scnn/kernels.hpp"

// Plain reference loops. No pragmas in this file; the parallel path in
// kernels_par.cpp must stay bit-identical to these.

namespace scnn::kernels {

namespace detail {

void check_outer(const Tensor& x, const Tensor& s) {
  require_rank(x, 1, "outer: first operand");
  require_rank(s, 1, "outer: second operand");
}

void check_column_mean(const Tensor& t) { require_rank(t, 2, "column_mean"); }

void check_matvec(const Tensor& W, const Tensor& x) {
  require_rank(W, 2, "matvec: matrix");
  require_rank(x, 1, "matvec: vector");
  if (W.dim(1) != x.dim(0)) {
    throw ShapeError("matvec: inner dimensions disagree, W " + W.shape_str() + " vs x " +
                     x.shape_str());
  }
}

void check_matvec_transpose(const Tensor& W, const Tensor& g) {
  require_rank(W, 2, "matvec_transpose: matrix");
  require_rank(g, 1, "matvec_transpose: vector");
  if (W.dim(0) != g.dim(0)) {
    throw ShapeError("matvec_transpose: dimensions disagree, W " + W.shape_str() + " vs g " +
                     g.shape_str());
  }
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(who) + ": shapes disagree, " + a.shape_str() + " vs " +
                     b.shape_str());
  }
}

void check_conv(const Tensor& in, const Tensor& K, const Tensor& bias) {
  require_rank(in, 2, "conv2d: input");
  require_rank(K, 3, "conv2d: kernels");
  require_rank(bias, 1, "conv2d: bias");
  if (K.dim(0) != bias.dim(0)) {
    throw ShapeError("conv2d: channel count disagrees between kernels " + K.shape_str() +
                     " and bias " + bias.shape_str());
  }
  if (K.dim(1) > in.dim(0) || K.dim(2) > in.dim(1)) {
    throw ShapeError("conv2d: kernel " + K.shape_str() + " larger than input " + in.shape_str());
  }
}

void check_pool(const Tensor& in, std::size_t k) {
  require_rank(in, 3, "maxpool2d: input");
  if (k == 0) throw ArgumentError("maxpool2d: kernel size must be >= 1");
}

}  // namespace detail

double mean(const Tensor& x) {
  require_rank(x, 1, "mean");
  if (x.size() == 0) throw ArgumentError("mean: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i];
  return sum / static_cast<double>(x.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

std::size_t argmax(const Tensor& x) {
  require_rank(x, 1, "argmax");
  if (x.size() == 0) throw ArgumentError("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] > x[best]) best = i;
  }
  return best;
}

SoftmaxXent softmax_cross_entropy(const Tensor& logits, std::size_t label) {
  require_rank(logits, 1, "softmax_cross_entropy");
  const std::size_t k = logits.size();
  if (k < 2) throw ArgumentError("softmax_cross_entropy: need at least 2 classes");
  if (label >= k) {
    throw ArgumentError("softmax_cross_entropy: label " + std::to_string(label) +
                        " out of range for " + std::to_string(k) + " classes");
  }
  double mx = logits[0];
  for (std::size_t i = 1; i < k; ++i) mx = std::max(mx, logits[i]);
  SoftmaxXent r;
  r.dlogits = Tensor({k});
  double denom = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = std::exp(logits[i] - mx);
    r.dlogits[i] = e;
    denom += e;
  }
  for (std::size_t i = 0; i < k; ++i) r.dlogits[i] /= denom;
  r.loss = -(logits[label] - mx - std::log(denom));
  r.dlogits[label] -= 1.0;
  return r;
}

namespace serial {

Tensor outer(const Tensor& x, const Tensor& s) {
  detail::check_outer(x, s);
  const std::size_t n = x.size(), m = s.size();
  Tensor r({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) r[i * m + j] = x[i] * s[j];
  }
  return r;
}

Tensor column_mean(const Tensor& t) {
  detail::check_column_mean(t);
  const std::size_t n = t.dim(0), m = t.dim(1);
  Tensor r({m});
  for (std::size_t j = 0; j < m; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += t[i * m + j];
    r[j] = sum / static_cast<double>(n);
  }
  return r;
}

void matvec(const Tensor& W, const Tensor& x, Tensor& y) {
  detail::check_matvec(W, x);
  const std::size_t rows = W.dim(0), cols = W.dim(1);
  const double* w = W.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    const double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) sum += wr[c] * x[c];
    y[r] = sum;
  }
}

Tensor matvec(const Tensor& W, const Tensor& x) {
  Tensor y({W.dim(0)});
  matvec(W, x, y);
  return y;
}

void matvec_transpose(const Tensor& W, const Tensor& g, Tensor& dx) {
  detail::check_matvec_transpose(W, g);
  const std::size_t rows = W.dim(0), cols = W.dim(1);
  const double* w = W.data();
  for (std::size_t c = 0; c < cols; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) sum += w[r * cols + c] * g[r];
    dx[c] = sum;
  }
}

void add_rank1(std::span<double> A, std::span<const double> g, std::span<const double> x) {
  const std::size_t rows = g.size(), cols = x.size();
  for (std::size_t r = 0; r < rows; ++r) {
    double* a = A.data() + r * cols;
    const double gr = g[r];
    for (std::size_t c = 0; c < cols; ++c) a[c] += gr * x[c];
  }
}

Tensor add(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "add");
  Tensor r(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

void add_inplace(Tensor& y, const Tensor& x) {
  detail::check_same_shape(y, x, "add_inplace");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
}

Tensor scale(const Tensor& x, double a) {
  Tensor r(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] * a;
  return r;
}

Tensor relu(const Tensor& x) {
  Tensor r(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] > 0.0 ? x[i] : 0.0;
  return r;
}

void conv2d_forward(const Tensor& in, const Tensor& K, const Tensor& bias, Tensor& out) {
  detail::check_conv(in, K, bias);
  const std::size_t H = in.dim(0), W = in.dim(1);
  const std::size_t C = K.dim(0), kh = K.dim(1), kw = K.dim(2);
  const std::size_t oh = conv_out_dim(H, kh), ow = conv_out_dim(W, kw);
  for (std::size_t c = 0; c < C; ++c) {
    const double* kc = K.data() + c * kh * kw;
    double* oc = out.data() + c * oh * ow;
    for (std::size_t p = 0; p < oh; ++p) {
      for (std::size_t q = 0; q < ow; ++q) {
        double sum = bias[c];
        for (std::size_t u = 0; u < kh; ++u) {
          const double* row = in.data() + (p + u) * W + q;
          const double* krow = kc + u * kw;
          for (std::size_t v = 0; v < kw; ++v) sum += row[v] * krow[v];
        }
        oc[p * ow + q] = sum;
      }
    }
  }
}

void conv2d_input_grad(const Tensor& K, const Tensor& gout, Tensor& din) {
  const std::size_t H = din.dim(0), W = din.dim(1);
  const std::size_t C = K.dim(0), kh = K.dim(1), kw = K.dim(2);
  const std::size_t oh = gout.dim(1), ow = gout.dim(2);
  // Gather form: each input cell sums the contributions that touch it.
  for (std::size_t i = 0; i < H; ++i) {
    for (std::size_t j = 0; j < W; ++j) {
      double sum = 0.0;
      const std::size_t pmin = (i + 1 > kh) ? i + 1 - kh : 0;
      const std::size_t pmax = std::min(i, oh - 1);
      const std::size_t qmin = (j + 1 > kw) ? j + 1 - kw : 0;
      const std::size_t qmax = std::min(j, ow - 1);
      for (std::size_t c = 0; c < C; ++c) {
        const double* kc = K.data() + c * kh * kw;
        const double* gc = gout.data() + c * oh * ow;
        for (std::size_t p = pmin; p <= pmax; ++p) {
          for (std::size_t q = qmin; q <= qmax; ++q) {
            sum += gc[p * ow + q] * kc[(i - p) * kw + (j - q)];
          }
        }
      }
      din[i * W + j] = sum;
    }
  }
}

void conv2d_param_grad(const Tensor& in, const Tensor& gout, std::span<double> dK,
                       std::span<double> db) {
  const std::size_t W = in.dim(1);
  const std::size_t C = gout.dim(0), oh = gout.dim(1), ow = gout.dim(2);
  const std::size_t kh = in.dim(0) - oh + 1, kw = W - ow + 1;
  for (std::size_t c = 0; c < C; ++c) {
    const double* gc = gout.data() + c * oh * ow;
    double* dkc = dK.data() + c * kh * kw;
    for (std::size_t u = 0; u < kh; ++u) {
      for (std::size_t v = 0; v < kw; ++v) {
        double sum = 0.0;
        for (std::size_t p = 0; p < oh; ++p) {
          const double* row = in.data() + (p + u) * W + v;
          const double* grow = gc + p * ow;
          for (std::size_t q = 0; q < ow; ++q) sum += grow[q] * row[q];
        }
        dkc[u * kw + v] += sum;
      }
    }
    double bsum = 0.0;
    for (std::size_t i = 0; i < oh * ow; ++i) bsum += gc[i];
    db[c] += bsum;
  }
}

void maxpool2d_forward(const Tensor& in, std::size_t k, Tensor& out,
                       std::vector<std::size_t>& argmax_idx) {
  detail::check_pool(in, k);
  const std::size_t C = in.dim(0), H = in.dim(1), W = in.dim(2);
  const std::size_t oh = pool_out_dim(H, k), ow = pool_out_dim(W, k);
  argmax_idx.assign(C * oh * ow, 0);
  for (std::size_t c = 0; c < C; ++c) {
    const double* ic = in.data() + c * H * W;
    for (std::size_t p = 0; p < oh; ++p) {
      for (std::size_t q = 0; q < ow; ++q) {
        const std::size_t i_end = std::min(H, (p + 1) * k);
        const std::size_t j_end = std::min(W, (q + 1) * k);
        std::size_t best = p * k * W + q * k;
        double best_v = ic[best];
        for (std::size_t i = p * k; i < i_end; ++i) {
          for (std::size_t j = q * k; j < j_end; ++j) {
            const std::size_t idx = i * W + j;
            if (ic[idx] > best_v) {
              best_v = ic[idx];
              best = idx;
            }
          }
        }
        const std::size_t o = c * oh * ow + p * ow + q;
        out[o] = best_v;
        argmax_idx[o] = c * H * W + best;
      }
    }
  }
}

void maxpool2d_backward(const Tensor& gout, const std::vector<std::size_t>& argmax_idx,
                        Tensor& din) {
  din.fill(0.0);
  // Windows are disjoint (stride == kernel), so routed writes never collide.
  for (std::size_t o = 0; o < gout.size(); ++o) din[argmax_idx[o]] += gout[o];
}

}  // namespace serial
}  // namespace scnn::kernels
