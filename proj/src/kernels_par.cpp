#include <algorithm>
#include <cstdint>

#include "scnn/kernels.hpp"

// OpenMP path. Every pragma below parallelizes across independent output
// elements; the reduction feeding one output element stays a serial loop in
// ascending order, identical to kernels_serial.cpp. That keeps results
// bit-equal to the serial reference for any thread count.

namespace scnn::kernels {

namespace {
// Loops smaller than this run serially; the fork/join overhead is not worth it.
constexpr std::size_t kParWork = 16384;
}  // namespace

Tensor outer(const Tensor& x, const Tensor& s) {
  detail::check_outer(x, s);
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  const std::int64_t m = static_cast<std::int64_t>(s.size());
  Tensor r({x.size(), s.size()});
  double* out = r.data();
  const double* xs = x.data();
  const double* ss = s.data();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n* m) >= kParWork)
  for (std::int64_t i = 0; i < n; ++i) {
    double* row = out + i * m;
    const double xi = xs[i];
    for (std::int64_t j = 0; j < m; ++j) row[j] = xi * ss[j];
  }
  return r;
}

Tensor column_mean(const Tensor& t) {
  detail::check_column_mean(t);
  const std::int64_t n = static_cast<std::int64_t>(t.dim(0));
  const std::int64_t m = static_cast<std::int64_t>(t.dim(1));
  Tensor r({t.dim(1)});
  const double* in = t.data();
  double* out = r.data();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n* m) >= kParWork)
  for (std::int64_t j = 0; j < m; ++j) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) sum += in[i * m + j];
    out[j] = sum / static_cast<double>(n);
  }
  return r;
}

void matvec(const Tensor& W, const Tensor& x, Tensor& y) {
  detail::check_matvec(W, x);
  const std::int64_t rows = static_cast<std::int64_t>(W.dim(0));
  const std::int64_t cols = static_cast<std::int64_t>(W.dim(1));
  const double* w = W.data();
  const double* xv = x.data();
  double* yv = y.data();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(rows* cols) >= kParWork)
  for (std::int64_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    const double* wr = w + r * cols;
    for (std::int64_t c = 0; c < cols; ++c) sum += wr[c] * xv[c];
    yv[r] = sum;
  }
}

Tensor matvec(const Tensor& W, const Tensor& x) {
  Tensor y({W.dim(0)});
  matvec(W, x, y);
  return y;
}

void matvec_transpose(const Tensor& W, const Tensor& g, Tensor& dx) {
  detail::check_matvec_transpose(W, g);
  const std::int64_t rows = static_cast<std::int64_t>(W.dim(0));
  const std::int64_t cols = static_cast<std::int64_t>(W.dim(1));
  const double* w = W.data();
  const double* gv = g.data();
  double* out = dx.data();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(rows* cols) >= kParWork)
  for (std::int64_t c = 0; c < cols; ++c) {
    double sum = 0.0;
    for (std::int64_t r = 0; r < rows; ++r) sum += w[r * cols + c] * gv[r];
    out[c] = sum;
  }
}

void add_rank1(std::span<double> A, std::span<const double> g, std::span<const double> x) {
  const std::int64_t rows = static_cast<std::int64_t>(g.size());
  const std::int64_t cols = static_cast<std::int64_t>(x.size());
  double* a0 = A.data();
  const double* gv = g.data();
  const double* xv = x.data();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(rows* cols) >= kParWork)
  for (std::int64_t r = 0; r < rows; ++r) {
    double* a = a0 + r * cols;
    const double gr = gv[r];
    for (std::int64_t c = 0; c < cols; ++c) a[c] += gr * xv[c];
  }
}

Tensor add(const Tensor& a, const Tensor& b) {
  detail::check_same_shape(a, b, "add");
  Tensor r(a.shape());
  const std::int64_t n = static_cast<std::int64_t>(a.size());
  const double* av = a.data();
  const double* bv = b.data();
  double* out = r.data();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n) >= kParWork)
  for (std::int64_t i = 0; i < n; ++i) out[i] = av[i] + bv[i];
  return r;
}

void add_inplace(Tensor& y, const Tensor& x) {
  detail::check_same_shape(y, x, "add_inplace");
  const std::int64_t n = static_cast<std::int64_t>(y.size());
  double* yv = y.data();
  const double* xv = x.data();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n) >= kParWork)
  for (std::int64_t i = 0; i < n; ++i) yv[i] += xv[i];
}

Tensor scale(const Tensor& x, double a) {
  Tensor r(x.shape());
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  const double* xv = x.data();
  double* out = r.data();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n) >= kParWork)
  for (std::int64_t i = 0; i < n; ++i) out[i] = xv[i] * a;
  return r;
}

Tensor relu(const Tensor& x) {
  Tensor r(x.shape());
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  const double* xv = x.data();
  double* out = r.data();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n) >= kParWork)
  for (std::int64_t i = 0; i < n; ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return r;
}

void conv2d_forward(const Tensor& in, const Tensor& K, const Tensor& bias, Tensor& out) {
  detail::check_conv(in, K, bias);
  const std::size_t H = in.dim(0), W = in.dim(1);
  const std::size_t C = K.dim(0), kh = K.dim(1), kw = K.dim(2);
  const std::size_t oh = conv_out_dim(H, kh), ow = conv_out_dim(W, kw);
  const std::int64_t total = static_cast<std::int64_t>(C * oh);
  const double* iv = in.data();
  const double* kv = K.data();
  const double* bv = bias.data();
  double* ov = out.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < total; ++t) {
    const std::size_t c = static_cast<std::size_t>(t) / oh;
    const std::size_t p = static_cast<std::size_t>(t) % oh;
    const double* kc = kv + c * kh * kw;
    double* orow = ov + c * oh * ow + p * ow;
    for (std::size_t q = 0; q < ow; ++q) {
      double sum = bv[c];
      for (std::size_t u = 0; u < kh; ++u) {
        const double* row = iv + (p + u) * W + q;
        const double* krow = kc + u * kw;
        for (std::size_t v = 0; v < kw; ++v) sum += row[v] * krow[v];
      }
      orow[q] = sum;
    }
  }
}

void conv2d_input_grad(const Tensor& K, const Tensor& gout, Tensor& din) {
  const std::size_t H = din.dim(0), W = din.dim(1);
  const std::size_t C = K.dim(0), kh = K.dim(1), kw = K.dim(2);
  const std::size_t oh = gout.dim(1), ow = gout.dim(2);
  const double* kv = K.data();
  const double* gv = gout.data();
  double* dv = din.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(H); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < W; ++j) {
      double sum = 0.0;
      const std::size_t pmin = (i + 1 > kh) ? i + 1 - kh : 0;
      const std::size_t pmax = std::min(i, oh - 1);
      const std::size_t qmin = (j + 1 > kw) ? j + 1 - kw : 0;
      const std::size_t qmax = std::min(j, ow - 1);
      for (std::size_t c = 0; c < C; ++c) {
        const double* kc = kv + c * kh * kw;
        const double* gc = gv + c * oh * ow;
        for (std::size_t p = pmin; p <= pmax; ++p) {
          for (std::size_t q = qmin; q <= qmax; ++q) {
            sum += gc[p * ow + q] * kc[(i - p) * kw + (j - q)];
          }
        }
      }
      dv[i * W + j] = sum;
    }
  }
}

void conv2d_param_grad(const Tensor& in, const Tensor& gout, std::span<double> dK,
                       std::span<double> db) {
  const std::size_t W = in.dim(1);
  const std::size_t C = gout.dim(0), oh = gout.dim(1), ow = gout.dim(2);
  const std::size_t kh = in.dim(0) - oh + 1, kw = W - ow + 1;
  const double* iv = in.data();
  const double* gv = gout.data();
  double* dkv = dK.data();
  double* dbv = db.data();
#pragma omp parallel for schedule(static)
  for (std::int64_t cc = 0; cc < static_cast<std::int64_t>(C); ++cc) {
    const std::size_t c = static_cast<std::size_t>(cc);
    const double* gc = gv + c * oh * ow;
    double* dkc = dkv + c * kh * kw;
    for (std::size_t u = 0; u < kh; ++u) {
      for (std::size_t v = 0; v < kw; ++v) {
        double sum = 0.0;
        for (std::size_t p = 0; p < oh; ++p) {
          const double* row = iv + (p + u) * W + v;
          const double* grow = gc + p * ow;
          for (std::size_t q = 0; q < ow; ++q) sum += grow[q] * row[q];
        }
        dkc[u * kw + v] += sum;
      }
    }
    double bsum = 0.0;
    for (std::size_t i = 0; i < oh * ow; ++i) bsum += gc[i];
    dbv[c] += bsum;
  }
}

void maxpool2d_forward(const Tensor& in, std::size_t k, Tensor& out,
                       std::vector<std::size_t>& argmax_idx) {
  detail::check_pool(in, k);
  const std::size_t C = in.dim(0), H = in.dim(1), W = in.dim(2);
  const std::size_t oh = pool_out_dim(H, k), ow = pool_out_dim(W, k);
  argmax_idx.assign(C * oh * ow, 0);
  const double* iv = in.data();
  double* ov = out.data();
  std::size_t* mv = argmax_idx.data();
  const std::int64_t total = static_cast<std::int64_t>(C * oh * ow);
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(total)* k* k >= kParWork)
  for (std::int64_t o = 0; o < total; ++o) {
    const std::size_t c = static_cast<std::size_t>(o) / (oh * ow);
    const std::size_t rem = static_cast<std::size_t>(o) % (oh * ow);
    const std::size_t p = rem / ow, q = rem % ow;
    const double* ic = iv + c * H * W;
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
    ov[o] = best_v;
    mv[o] = c * H * W + best;
  }
}

void maxpool2d_backward(const Tensor& gout, const std::vector<std::size_t>& argmax_idx,
                        Tensor& din) {
  din.fill(0.0);
  // Disjoint windows: scatter targets never collide, safe to parallelize.
  const std::int64_t n = static_cast<std::int64_t>(gout.size());
  const double* gv = gout.data();
  const std::size_t* mv = argmax_idx.data();
  double* dv = din.data();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n) >= kParWork)
  for (std::int64_t o = 0; o < n; ++o) dv[mv[o]] += gv[o];
}

}  // namespace scnn::kernels
