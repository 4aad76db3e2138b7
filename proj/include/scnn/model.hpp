#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scnn/layers.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

enum class ModelVariant { kScnn, kMlp, kCnn, kBilstm };

std::string_view variant_name(ModelVariant v);
ModelVariant variant_from_name(std::string_view name);  // throws ArgumentError

// Architecture hyperparameters. The defaults are the full-scale text
// classification setup: 140 tokens x 100-dim embeddings over a 100k
// vocabulary, two classes.
struct ModelConfig {
  std::size_t vocab_size = 100000;
  std::size_t embed_dim = 100;
  std::size_t seq_len = 140;
  std::size_t num_classes = 2;

  // scnn: chain of swarm filters, then a dense head.
  std::vector<std::size_t> scnn_filter_dims = {300, 10};
  bool relu_after_filters = false;

  // mlp: flatten -> dense(mlp_hidden) -> relu -> dense(num_classes).
  std::size_t mlp_hidden = 2;

  // cnn: reshape [L,d] -> conv(channels, kernel) -> relu -> ceil-maxpool ->
  // flatten -> dense(num_classes).
  std::size_t cnn_channels = 20;
  std::size_t cnn_kernel_h = 100;
  std::size_t cnn_kernel_w = 100;
  std::size_t cnn_pool = 20;

  // bilstm: reshape -> bilstm (sequences) -> bilstm (last step) -> dense.
  std::size_t lstm_layers = 2;
  std::size_t lstm_hidden = 128;
};

// Everything one forward pass caches for the matching backward pass.
struct ModelTrace {
  std::vector<std::int32_t> ids;
  Tensor embedded;
  std::vector<LayerContext> contexts;
  Tensor logits;
  Tensor swarm_features;  // output of the last swarm filter (scnn only)
};

// Embedding + layer trunk for one of the four variants. Construction builds
// the trunk, validates the whole shape chain, and initializes parameters
// from uniform(-0.05, 0.05) using the given seed (biases start at zero).
class Model {
 public:
  Model(ModelVariant variant, const ModelConfig& cfg, std::uint64_t seed);

  ModelVariant variant() const { return variant_; }
  const ModelConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }

  // ids.size() must equal seq_len (inputs are padded upstream).
  Tensor forward(std::span<const std::int32_t> ids, ModelTrace& trace) const;
  // Accumulates parameter gradients (dense per-tensor buffers plus the
  // embedding's sparse rows) and discards the input gradient.
  void backward(const Tensor& dlogits, const ModelTrace& trace);
  void zero_grad();

  Tensor predict_logits(std::span<const std::int32_t> ids) const;
  // Argmax over logits; ties resolve to the lowest class index.
  std::size_t predict_class(std::span<const std::int32_t> ids) const;

  // scnn only: activation vector coming out of the final swarm filter.
  Tensor swarm_features(std::span<const std::int32_t> ids) const;
  // scnn without inter-filter relu only: logits via the algebraic collapse
  // logits = W * ((mean(embedded) * mean(s1)) * s2) + b. Must agree with the
  // layer-by-layer forward to ~1e-9.
  Tensor closed_form_logits(std::span<const std::int32_t> ids) const;

  std::size_t param_count(bool include_embedding) const;
  // "embedding.table" followed by "layer<i>.<name>" in build order.
  std::vector<Param> named_params();
  Embedding& embedding() { return embedding_; }
  const Embedding& embedding() const { return embedding_; }
  std::vector<std::unique_ptr<Layer>>& layers() { return layers_; }
  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }

  void save_checkpoint(const std::string& path) const;
  static Model load_checkpoint(const std::string& path);

 private:
  void build_trunk();
  void validate_shapes() const;

  ModelVariant variant_;
  ModelConfig cfg_;
  std::uint64_t seed_ = 0;
  Embedding embedding_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::size_t last_filter_idx_ = static_cast<std::size_t>(-1);
};

}  // namespace scnn
