#include "scnn/model.hpp"

#include <cstring>
#include <fstream>
#include <utility>

#include "scnn/bytes.hpp"
#include "scnn/error.hpp"
#include "scnn/kernels.hpp"
#include "scnn/prng.hpp"

namespace scnn {

std::string_view variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::kScnn: return "scnn";
    case ModelVariant::kMlp: return "mlp";
    case ModelVariant::kCnn: return "cnn";
    case ModelVariant::kBilstm: return "bilstm";
  }
  return "unknown";
}

ModelVariant variant_from_name(std::string_view name) {
  if (name == "scnn") return ModelVariant::kScnn;
  if (name == "mlp") return ModelVariant::kMlp;
  if (name == "cnn") return ModelVariant::kCnn;
  if (name == "bilstm") return ModelVariant::kBilstm;
  throw ArgumentError("unknown model variant '" + std::string(name) +
                      "' (expected scnn, mlp, cnn or bilstm)");
}

Model::Model(ModelVariant variant, const ModelConfig& cfg, std::uint64_t seed)
    : variant_(variant), cfg_(cfg), seed_(seed), embedding_(
          [&cfg] {
            if (cfg.vocab_size == 0 || cfg.embed_dim == 0 || cfg.seq_len == 0) {
              throw ConfigError("model config: vocab_size, embed_dim and seq_len must be >= 1");
            }
            if (cfg.num_classes < 2) {
              throw ConfigError("model config: num_classes must be >= 2");
            }
            return cfg.vocab_size;
          }(),
          cfg.embed_dim) {
  build_trunk();
  validate_shapes();
  Prng rng(Prng::mix(seed_, streams::kModelInit));
  embedding_.init_uniform(rng, -0.05, 0.05);
  for (auto& layer : layers_) layer->init_params(rng, -0.05, 0.05);
}

void Model::build_trunk() {
  const std::size_t flat_in = cfg_.seq_len * cfg_.embed_dim;
  switch (variant_) {
    case ModelVariant::kScnn: {
      if (cfg_.scnn_filter_dims.empty()) {
        throw ConfigError("model config: scnn needs at least one filter dimension");
      }
      for (std::size_t d : cfg_.scnn_filter_dims) {
        if (d == 0) throw ConfigError("model config: scnn filter dimensions must be >= 1");
        layers_.push_back(std::make_unique<SwarmFilter>(d));
        last_filter_idx_ = layers_.size() - 1;
        if (cfg_.relu_after_filters) layers_.push_back(std::make_unique<Relu>());
      }
      layers_.push_back(std::make_unique<Dense>(cfg_.scnn_filter_dims.back(), cfg_.num_classes));
      break;
    }
    case ModelVariant::kMlp: {
      if (cfg_.mlp_hidden == 0) throw ConfigError("model config: mlp_hidden must be >= 1");
      layers_.push_back(std::make_unique<Dense>(flat_in, cfg_.mlp_hidden));
      layers_.push_back(std::make_unique<Relu>());
      layers_.push_back(std::make_unique<Dense>(cfg_.mlp_hidden, cfg_.num_classes));
      break;
    }
    case ModelVariant::kCnn: {
      if (cfg_.cnn_kernel_h > cfg_.seq_len || cfg_.cnn_kernel_w > cfg_.embed_dim) {
        throw ConfigError("model config: cnn kernel " + std::to_string(cfg_.cnn_kernel_h) + "x" +
                          std::to_string(cfg_.cnn_kernel_w) + " does not fit input " +
                          std::to_string(cfg_.seq_len) + "x" + std::to_string(cfg_.embed_dim));
      }
      if (cfg_.cnn_channels == 0 || cfg_.cnn_pool == 0) {
        throw ConfigError("model config: cnn_channels and cnn_pool must be >= 1");
      }
      const std::size_t conv_h = kernels::conv_out_dim(cfg_.seq_len, cfg_.cnn_kernel_h);
      const std::size_t conv_w = kernels::conv_out_dim(cfg_.embed_dim, cfg_.cnn_kernel_w);
      const std::size_t pool_h = kernels::pool_out_dim(conv_h, cfg_.cnn_pool);
      const std::size_t pool_w = kernels::pool_out_dim(conv_w, cfg_.cnn_pool);
      const std::size_t flat = cfg_.cnn_channels * pool_h * pool_w;
      layers_.push_back(std::make_unique<Reshape>(
          std::vector<std::size_t>{cfg_.seq_len, cfg_.embed_dim}));
      layers_.push_back(
          std::make_unique<Conv2d>(cfg_.cnn_channels, cfg_.cnn_kernel_h, cfg_.cnn_kernel_w));
      layers_.push_back(std::make_unique<Relu>());
      layers_.push_back(std::make_unique<MaxPool2d>(cfg_.cnn_pool));
      layers_.push_back(std::make_unique<Reshape>(std::vector<std::size_t>{flat}));
      layers_.push_back(std::make_unique<Dense>(flat, cfg_.num_classes));
      break;
    }
    case ModelVariant::kBilstm: {
      if (cfg_.lstm_layers == 0 || cfg_.lstm_hidden == 0) {
        throw ConfigError("model config: lstm_layers and lstm_hidden must be >= 1");
      }
      layers_.push_back(std::make_unique<Reshape>(
          std::vector<std::size_t>{cfg_.seq_len, cfg_.embed_dim}));
      for (std::size_t li = 0; li < cfg_.lstm_layers; ++li) {
        const std::size_t in = li == 0 ? cfg_.embed_dim : 2 * cfg_.lstm_hidden;
        const bool keep_sequence = li + 1 < cfg_.lstm_layers;
        layers_.push_back(std::make_unique<BiLstm>(in, cfg_.lstm_hidden, keep_sequence));
      }
      layers_.push_back(std::make_unique<Dense>(2 * cfg_.lstm_hidden, cfg_.num_classes));
      break;
    }
  }
}

void Model::validate_shapes() const {
  std::vector<std::size_t> shape{cfg_.seq_len * cfg_.embed_dim};
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    try {
      shape = layers_[i]->output_shape(shape);
    } catch (const ShapeError& e) {
      throw ConfigError("model config: layer " + std::to_string(i) + " (" +
                        std::string(layers_[i]->kind()) + ") rejects its input: " + e.what());
    }
  }
  if (shape != std::vector<std::size_t>{cfg_.num_classes}) {
    throw ConfigError("model config: trunk produces " + shape_to_string(shape) + ", expected [" +
                      std::to_string(cfg_.num_classes) + "]");
  }
}

Tensor Model::forward(std::span<const std::int32_t> ids, ModelTrace& trace) const {
  if (ids.size() != cfg_.seq_len) {
    throw ArgumentError("model: expected " + std::to_string(cfg_.seq_len) + " token ids, got " +
                        std::to_string(ids.size()));
  }
  trace.ids.assign(ids.begin(), ids.end());
  trace.embedded = embedding_.forward(ids);
  trace.contexts.assign(layers_.size(), LayerContext{});
  Tensor cur = trace.embedded;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    cur = layers_[i]->forward(cur, trace.contexts[i]);
    if (i == last_filter_idx_) trace.swarm_features = cur;
  }
  trace.logits = cur;
  return cur;
}

void Model::backward(const Tensor& dlogits, const ModelTrace& trace) {
  Tensor g = dlogits;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i]->backward(g, trace.contexts[i]);
  }
  embedding_.backward(trace.ids, g);
}

void Model::zero_grad() {
  for (auto& layer : layers_) {
    for (auto& p : layer->params()) p.tensor->zero_grad();
  }
  embedding_.clear_sparse_grad();
}

Tensor Model::predict_logits(std::span<const std::int32_t> ids) const {
  ModelTrace trace;
  return forward(ids, trace);
}

std::size_t Model::predict_class(std::span<const std::int32_t> ids) const {
  return kernels::argmax(predict_logits(ids));
}

Tensor Model::swarm_features(std::span<const std::int32_t> ids) const {
  if (variant_ != ModelVariant::kScnn) {
    throw ArgumentError("swarm_features: only defined for the scnn variant");
  }
  ModelTrace trace;
  forward(ids, trace);
  return trace.swarm_features;
}

Tensor Model::closed_form_logits(std::span<const std::int32_t> ids) const {
  if (variant_ != ModelVariant::kScnn) {
    throw ArgumentError("closed_form_logits: only defined for the scnn variant");
  }
  if (cfg_.relu_after_filters) {
    throw ArgumentError("closed_form_logits: the collapse is invalid with relu between filters");
  }
  Tensor embedded = embedding_.forward(ids);
  // Each filter multiplies by the running scalar mean; only the last filter's
  // direction survives.
  double c = kernels::mean(embedded);
  const SwarmFilter* last_filter = nullptr;
  const Dense* head = nullptr;
  for (const auto& layer : layers_) {
    if (auto* f = dynamic_cast<const SwarmFilter*>(layer.get())) {
      if (last_filter != nullptr) c *= kernels::mean(last_filter->weights());
      last_filter = f;
    } else if (auto* d = dynamic_cast<const Dense*>(layer.get())) {
      head = d;
    }
  }
  Tensor features = kernels::scale(last_filter->weights(), c);
  Tensor logits = kernels::matvec(head->weight(), features);
  kernels::add_inplace(logits, head->bias());
  return logits;
}

std::size_t Model::param_count(bool include_embedding) const {
  std::size_t n = include_embedding ? embedding_.param_count() : 0;
  for (const auto& layer : layers_) n += layer->param_count();
  return n;
}

std::vector<Param> Model::named_params() {
  std::vector<Param> out;
  out.push_back(Param{"embedding.table", &embedding_.table(), false});
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto& p : layers_[i]->params()) {
      out.push_back(Param{"layer" + std::to_string(i) + "." + p.name, p.tensor, p.is_bias});
    }
  }
  return out;
}

// ---- checkpoint io ----
//
// Layout: "SCN1", u32 version, u32 variant, config block, u64 seed, then each
// named parameter in build order as (u32 name_len, name, u32 rank, u64 dims,
// f64 data). Everything little-endian.

namespace {

constexpr char kMagic[4] = {'S', 'C', 'N', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr const char* kWho = "checkpoint";

using bytes::put_u32;
using bytes::put_u64;
using bytes::put_f64;

std::uint32_t get_u32(std::istream& is) { return bytes::get_u32(is, kWho); }
std::uint64_t get_u64(std::istream& is) { return bytes::get_u64(is, kWho); }
double get_f64(std::istream& is) { return bytes::get_f64(is, kWho); }

void put_config(std::ostream& os, const ModelConfig& cfg) {
  put_u64(os, cfg.vocab_size);
  put_u64(os, cfg.embed_dim);
  put_u64(os, cfg.seq_len);
  put_u64(os, cfg.num_classes);
  put_u64(os, cfg.scnn_filter_dims.size());
  for (std::size_t d : cfg.scnn_filter_dims) put_u64(os, d);
  put_u32(os, cfg.relu_after_filters ? 1 : 0);
  put_u64(os, cfg.mlp_hidden);
  put_u64(os, cfg.cnn_channels);
  put_u64(os, cfg.cnn_kernel_h);
  put_u64(os, cfg.cnn_kernel_w);
  put_u64(os, cfg.cnn_pool);
  put_u64(os, cfg.lstm_layers);
  put_u64(os, cfg.lstm_hidden);
}

ModelConfig get_config(std::istream& is) {
  ModelConfig cfg;
  cfg.vocab_size = get_u64(is);
  cfg.embed_dim = get_u64(is);
  cfg.seq_len = get_u64(is);
  cfg.num_classes = get_u64(is);
  const std::uint64_t n_filters = get_u64(is);
  if (n_filters > 1024) throw IoError("checkpoint: implausible filter count");
  cfg.scnn_filter_dims.clear();
  for (std::uint64_t i = 0; i < n_filters; ++i) cfg.scnn_filter_dims.push_back(get_u64(is));
  cfg.relu_after_filters = get_u32(is) != 0;
  cfg.mlp_hidden = get_u64(is);
  cfg.cnn_channels = get_u64(is);
  cfg.cnn_kernel_h = get_u64(is);
  cfg.cnn_kernel_w = get_u64(is);
  cfg.cnn_pool = get_u64(is);
  cfg.lstm_layers = get_u64(is);
  cfg.lstm_hidden = get_u64(is);
  return cfg;
}

}  // namespace

void Model::save_checkpoint(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("checkpoint: cannot open '" + path + "' for writing");
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(variant_));
  put_config(os, cfg_);
  put_u64(os, seed_);
  auto params = const_cast<Model*>(this)->named_params();
  for (const auto& p : params) {
    put_u32(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u32(os, static_cast<std::uint32_t>(p.tensor->rank()));
    for (std::size_t d : p.tensor->shape()) put_u64(os, d);
    for (std::size_t i = 0; i < p.tensor->size(); ++i) put_f64(os, (*p.tensor)[i]);
  }
  os.flush();
  if (!os) throw IoError("checkpoint: write to '" + path + "' failed");
}

Model Model::load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open '" + path + "'");
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("checkpoint: '" + path + "' is not a model checkpoint");
  }
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t variant_raw = get_u32(is);
  if (variant_raw > 3) throw IoError("checkpoint: unknown variant tag");
  const ModelConfig cfg = get_config(is);
  const std::uint64_t seed = get_u64(is);

  Model model(static_cast<ModelVariant>(variant_raw), cfg, seed);
  for (auto& p : model.named_params()) {
    const std::uint32_t name_len = get_u32(is);
    if (name_len > 4096) throw IoError("checkpoint: implausible parameter name length");
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) throw IoError("checkpoint: truncated file");
    if (name != p.name) {
      throw IoError("checkpoint: expected parameter '" + p.name + "', found '" + name + "'");
    }
    const std::uint32_t rank = get_u32(is);
    if (rank != p.tensor->rank()) {
      throw IoError("checkpoint: parameter '" + name + "' rank mismatch");
    }
    for (std::size_t d = 0; d < rank; ++d) {
      if (get_u64(is) != p.tensor->dim(d)) {
        throw IoError("checkpoint: parameter '" + name + "' shape mismatch");
      }
    }
    for (std::size_t i = 0; i < p.tensor->size(); ++i) (*p.tensor)[i] = get_f64(is);
  }
  char extra;
  if (is.read(&extra, 1)) throw IoError("checkpoint: trailing bytes after parameters");
  return model;
}

}  // namespace scnn
