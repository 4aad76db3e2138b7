#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scnn/tensor.hpp"

namespace scnn::kernels {

// Math kernels every layer is built from.
//
// The default functions in scnn::kernels are OpenMP-parallel. Parallelism is
// only ever across independent output elements; the reduction feeding each
// output element keeps a fixed ascending iteration order. Results are
// therefore bit-identical to the serial reference in scnn::kernels::serial
// for any thread count (asserted in tests, timed in bench_kernels).

// ---- scalar reductions (single implementation, fixed order) ----

// Arithmetic mean of a rank-1 tensor, summed in ascending index order.
double mean(const Tensor& x);

double dot(std::span<const double> a, std::span<const double> b);

// Index of the largest element; ties resolve to the lowest index.
std::size_t argmax(const Tensor& x);

struct SoftmaxXent {
  double loss = 0.0;
  Tensor dlogits;
};

// Numerically stable (max-subtracted) softmax + cross-entropy against a class
// index. dlogits = softmax(logits) - onehot(label).
SoftmaxXent softmax_cross_entropy(const Tensor& logits, std::size_t label);

// ---- output dimension helpers ----

// Valid (no padding) convolution, stride 1.
inline std::size_t conv_out_dim(std::size_t in, std::size_t k) { return in - k + 1; }
// Ceil-mode pooling with stride == kernel: partial edge windows count.
inline std::size_t pool_out_dim(std::size_t in, std::size_t k) { return (in + k - 1) / k; }

// ---- parallel kernels (default path) ----

// result[i,j] = x[i] * s[j]; x, s rank-1.
Tensor outer(const Tensor& x, const Tensor& s);

// result[j] = (1/n) * sum_i t[i,j]; t rank-2.
Tensor column_mean(const Tensor& t);

// y = W x; W rank-2 [out,in], x rank-1 [in].
void matvec(const Tensor& W, const Tensor& x, Tensor& y);
Tensor matvec(const Tensor& W, const Tensor& x);

// dx = W^T g; W rank-2 [out,in], g rank-1 [out].
void matvec_transpose(const Tensor& W, const Tensor& g, Tensor& dx);

// A += g (outer) x, A row-major [g.size() x x.size()].
void add_rank1(std::span<double> A, std::span<const double> g, std::span<const double> x);

Tensor add(const Tensor& a, const Tensor& b);
void add_inplace(Tensor& y, const Tensor& x);
Tensor scale(const Tensor& x, double a);
Tensor relu(const Tensor& x);

// out[c,p,q] = b[c] + sum_{u,v} in[p+u, q+v] * K[c,u,v].
// in [H,W], K [C,kh,kw], bias [C], out [C,H-kh+1,W-kw+1].
void conv2d_forward(const Tensor& in, const Tensor& K, const Tensor& bias, Tensor& out);

// din[i,j] = sum over channels and output positions hit by (i,j).
void conv2d_input_grad(const Tensor& K, const Tensor& gout, Tensor& din);

// dK[c,u,v] += sum_{p,q} gout[c,p,q] * in[p+u, q+v]; db[c] += sum_{p,q} gout[c,p,q].
void conv2d_param_grad(const Tensor& in, const Tensor& gout, std::span<double> dK,
                       std::span<double> db);

// Ceil-mode max pooling, stride == k, per channel. in [C,H,W],
// out [C,ceil(H/k),ceil(W/k)]. argmax_idx records, per output element, the
// flat input index of the window max (first occurrence on ties).
void maxpool2d_forward(const Tensor& in, std::size_t k, Tensor& out,
                       std::vector<std::size_t>& argmax_idx);

// Routes each upstream value to its recorded argmax position.
void maxpool2d_backward(const Tensor& gout, const std::vector<std::size_t>& argmax_idx,
                        Tensor& din);

// ---- serial reference twins (kept for testing and benchmarking) ----
namespace serial {

Tensor outer(const Tensor& x, const Tensor& s);
Tensor column_mean(const Tensor& t);
void matvec(const Tensor& W, const Tensor& x, Tensor& y);
Tensor matvec(const Tensor& W, const Tensor& x);
void matvec_transpose(const Tensor& W, const Tensor& g, Tensor& dx);
void add_rank1(std::span<double> A, std::span<const double> g, std::span<const double> x);
Tensor add(const Tensor& a, const Tensor& b);
void add_inplace(Tensor& y, const Tensor& x);
Tensor scale(const Tensor& x, double a);
Tensor relu(const Tensor& x);
void conv2d_forward(const Tensor& in, const Tensor& K, const Tensor& bias, Tensor& out);
void conv2d_input_grad(const Tensor& K, const Tensor& gout, Tensor& din);
void conv2d_param_grad(const Tensor& in, const Tensor& gout, std::span<double> dK,
                       std::span<double> db);
void maxpool2d_forward(const Tensor& in, std::size_t k, Tensor& out,
                       std::vector<std::size_t>& argmax_idx);
void maxpool2d_backward(const Tensor& gout, const std::vector<std::size_t>& argmax_idx,
                        Tensor& din);

}  // namespace serial

// Shared shape checks (throw ShapeError/ArgumentError on violation).
namespace detail {
void check_outer(const Tensor& x, const Tensor& s);
void check_column_mean(const Tensor& t);
void check_matvec(const Tensor& W, const Tensor& x);
void check_matvec_transpose(const Tensor& W, const Tensor& g);
void check_same_shape(const Tensor& a, const Tensor& b, const char* who);
void check_conv(const Tensor& in, const Tensor& K, const Tensor& bias);
void check_pool(const Tensor& in, std::size_t k);
}  // namespace detail

}  // namespace scnn::kernels
