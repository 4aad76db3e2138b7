#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scnn/prng.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

struct Param {
  std::string name;
  Tensor* tensor = nullptr;
  bool is_bias = false;
};

// Per-forward-call cache. Owned by the caller, one per layer per pass, so
// inference over distinct contexts on shared read-only parameters can run in
// parallel while training stays single-writer.
struct LayerContext {
  std::vector<Tensor> tensors;
  std::vector<std::size_t> dims;
  std::vector<std::size_t> indices;
  std::vector<double> scalars;
  void clear() {
    tensors.clear();
    dims.clear();
    indices.clear();
    scalars.clear();
  }
};

// Differentiable layer with hand-derived backward. forward is const and
// writes whatever backward needs into the context; backward returns the
// input gradient and accumulates parameter gradients.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string_view kind() const = 0;
  virtual std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const = 0;
  virtual Tensor forward(const Tensor& x, LayerContext& ctx) const = 0;
  virtual Tensor backward(const Tensor& g, const LayerContext& ctx) = 0;

  std::vector<Param> params();
  std::size_t param_count() const;

  // Weights from uniform(lo, hi) in declaration order, biases to zero.
  void init_params(Prng& rng, double lo, double hi);

 protected:
  void add_param(std::string name, Tensor t, bool is_bias = false);
  Tensor& param(std::size_t i) { return params_[i]; }
  const Tensor& param(std::size_t i) const { return params_[i]; }

 private:
  std::vector<std::string> param_names_;
  std::vector<bool> param_is_bias_;
  std::vector<Tensor> params_;
};

// f[j] = mean(x) * s[j]  — the collapsed form of averaging the columns of
// x (outer) s. Must match the naive outer/column-mean route to 1e-12.
class SwarmFilter : public Layer {
 public:
  explicit SwarmFilter(std::size_t m);
  std::string_view kind() const override { return "swarm_filter"; }
  std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
  Tensor forward(const Tensor& x, LayerContext& ctx) const override;
  Tensor backward(const Tensor& g, const LayerContext& ctx) override;
  const Tensor& weights() const { return param(0); }
  Tensor& weights() { return param(0); }
};

// y = W x + b.
class Dense : public Layer {
 public:
  Dense(std::size_t in, std::size_t out);
  std::string_view kind() const override { return "dense"; }
  std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
  Tensor forward(const Tensor& x, LayerContext& ctx) const override;
  Tensor backward(const Tensor& g, const LayerContext& ctx) override;
  const Tensor& weight() const { return param(0); }
  const Tensor& bias() const { return param(1); }

 private:
  std::size_t in_, out_;
};

class Relu : public Layer {
 public:
  std::string_view kind() const override { return "relu"; }
  std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
  Tensor forward(const Tensor& x, LayerContext& ctx) const override;
  Tensor backward(const Tensor& g, const LayerContext& ctx) override;
};

// Pure view change; backward restores the incoming shape.
class Reshape : public Layer {
 public:
  explicit Reshape(std::vector<std::size_t> target);
  std::string_view kind() const override { return "reshape"; }
  std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
  Tensor forward(const Tensor& x, LayerContext& ctx) const override;
  Tensor backward(const Tensor& g, const LayerContext& ctx) override;

 private:
  std::vector<std::size_t> target_;
};

// Valid convolution, stride 1, single input channel, C output channels.
class Conv2d : public Layer {
 public:
  Conv2d(std::size_t channels, std::size_t kh, std::size_t kw);
  std::string_view kind() const override { return "conv2d"; }
  std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
  Tensor forward(const Tensor& x, LayerContext& ctx) const override;
  Tensor backward(const Tensor& g, const LayerContext& ctx) override;

 private:
  std::size_t channels_, kh_, kw_;
};

// Ceil-mode max pooling, stride == kernel (partial edge windows kept).
class MaxPool2d : public Layer {
 public:
  explicit MaxPool2d(std::size_t k);
  std::string_view kind() const override { return "maxpool2d"; }
  std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
  Tensor forward(const Tensor& x, LayerContext& ctx) const override;
  Tensor backward(const Tensor& g, const LayerContext& ctx) override;

 private:
  std::size_t k_;
};

// One bidirectional LSTM layer (two-bias formulation, gates packed i|f|g|o).
// Input [L,in]. With return_sequences, output is [L,2h] (per-step forward and
// reverse states concatenated); otherwise [2h], the forward state at t=L-1
// concatenated with the reverse state at t=0 (each direction's last step).
class BiLstm : public Layer {
 public:
  BiLstm(std::size_t in, std::size_t hidden, bool return_sequences);
  std::string_view kind() const override { return "bilstm"; }
  std::vector<std::size_t> output_shape(const std::vector<std::size_t>& in) const override;
  Tensor forward(const Tensor& x, LayerContext& ctx) const override;
  Tensor backward(const Tensor& g, const LayerContext& ctx) override;

 private:
  // Runs one direction over the input; writes gates/cells/hiddens for BPTT.
  void run_direction(const Tensor& x, bool reverse, Tensor& gates, Tensor& cells,
                     Tensor& tanh_cells, Tensor& hiddens) const;
  void backprop_direction(const Tensor& x, bool reverse, const LayerContext& ctx,
                          const Tensor& g, bool seq_grad, Tensor& dx);

  std::size_t in_, h_;
  bool return_sequences_;
};

// Token-id lookup table producing the concatenated embedding vector.
// Gradients are kept sparse (row -> accumulated slice) because only the rows
// present in a batch ever receive gradient.
class Embedding {
 public:
  Embedding(std::size_t vocab, std::size_t dim);

  // Rows E[ids[0]] .. E[ids[L-1]] concatenated, length L*dim.
  Tensor forward(std::span<const std::int32_t> ids) const;
  // Scatter-adds each upstream slice into its row; repeated ids accumulate.
  void backward(std::span<const std::int32_t> ids, const Tensor& g);

  Tensor& table() { return table_; }
  const Tensor& table() const { return table_; }
  std::size_t vocab_size() const { return table_.dim(0); }
  std::size_t dim() const { return table_.dim(1); }
  std::size_t param_count() const { return table_.size(); }

  std::map<std::int32_t, std::vector<double>>& sparse_grad() { return sparse_grad_; }
  void clear_sparse_grad() { sparse_grad_.clear(); }

  void init_uniform(Prng& rng, double lo, double hi);

 private:
  Tensor table_;
  std::map<std::int32_t, std::vector<double>> sparse_grad_;
};

}  // namespace scnn
