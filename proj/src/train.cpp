#include "scnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scnn/error.hpp"
#include "scnn/kernels.hpp"
#include "scnn/prng.hpp"

namespace scnn::train {

OptimizerKind optimizer_from_name(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw ArgumentError("unknown optimizer '" + std::string(name) + "' (expected adam or sgd)");
}

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

void sgd_step(std::span<double> w, std::span<const double> g, double lr) {
  if (w.size() != g.size()) {
    throw ShapeError("sgd: parameter/gradient size mismatch (" + std::to_string(w.size()) +
                     " vs " + std::to_string(g.size()) + ")");
  }
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
}

void adam_step(std::span<double> w, std::span<const double> g, AdamBuffers& state,
               std::uint64_t t, double lr) {
  if (w.size() != g.size()) {
    throw ShapeError("adam: parameter/gradient size mismatch (" + std::to_string(w.size()) +
                     " vs " + std::to_string(g.size()) + ")");
  }
  if (state.m.empty()) {
    state.m.assign(w.size(), 0.0);
    state.v.assign(w.size(), 0.0);
  } else if (state.m.size() != w.size()) {
    throw ShapeError("adam: moment buffer size mismatch");
  }
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));
  for (std::size_t i = 0; i < w.size(); ++i) {
    state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * g[i];
    state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    w[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
  }
}

Optimizer::Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {
  if (lr <= 0.0) throw ArgumentError("optimizer: learning rate must be positive");
}

void Optimizer::attach(Model& model) {
  std::size_t dense_count = 0;
  for (const auto& p : model.named_params()) {
    if (p.tensor != &model.embedding().table()) ++dense_count;
  }
  dense_.assign(dense_count, AdamBuffers{});
  embedding_.m.assign(model.embedding().table().size(), 0.0);
  embedding_.v.assign(model.embedding().table().size(), 0.0);
  attached_ = true;
}

void Optimizer::step(Model& model) {
  if (!attached_) attach(model);
  ++t_;

  std::size_t di = 0;
  for (auto& p : model.named_params()) {
    if (p.tensor == &model.embedding().table()) continue;
    AdamBuffers& st = dense_[di++];
    p.tensor->ensure_grad();  // an untouched parameter just sees zero gradient
    if (kind_ == OptimizerKind::kSgd) {
      sgd_step(p.tensor->values(), p.tensor->grad_values(), lr_);
    } else {
      adam_step(p.tensor->values(), p.tensor->grad_values(), st, t_, lr_);
    }
  }

  Embedding& emb = model.embedding();
  const std::size_t d = emb.dim();
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t_));
  for (const auto& [row, grad] : emb.sparse_grad()) {
    double* w = emb.table().data() + static_cast<std::size_t>(row) * d;
    if (kind_ == OptimizerKind::kSgd) {
      for (std::size_t k = 0; k < d; ++k) w[k] -= lr_ * grad[k];
      continue;
    }
    const std::size_t off = static_cast<std::size_t>(row) * d;
    for (std::size_t k = 0; k < d; ++k) {
      double& m = embedding_.m[off + k];
      double& v = embedding_.v[off + k];
      m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * grad[k];
      v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * grad[k] * grad[k];
      w[k] -= lr_ * (m / bc1) / (std::sqrt(v / bc2) + kAdamEps);
    }
  }
  model.zero_grad();
}

EvalResult evaluate(const Model& model, const data::Dataset& ds) {
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return evaluate(model, ds, all);
}

EvalResult evaluate(const Model& model, const data::Dataset& ds,
                    std::span<const std::size_t> indices) {
  if (indices.empty()) throw ArgumentError("evaluate: empty dataset");
  std::vector<std::int32_t> ids(model.config().seq_len);
  ModelTrace trace;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (const std::size_t idx : indices) {
    ds.ids_padded(idx, ids);
    const Tensor logits = model.forward(ids, trace);
    const auto label = static_cast<std::size_t>(ds.label(idx));
    loss_sum += kernels::softmax_cross_entropy(logits, label).loss;
    correct += kernels::argmax(logits) == label ? 1 : 0;
  }
  const auto n = static_cast<double>(indices.size());
  return EvalResult{static_cast<double>(correct) / n, loss_sum / n, indices.size()};
}

namespace {

// Full parameter snapshot (embedding included) for best-dev restore.
std::vector<std::vector<double>> snapshot_params(Model& model) {
  std::vector<std::vector<double>> out;
  for (const auto& p : model.named_params()) {
    out.emplace_back(p.tensor->data(), p.tensor->data() + p.tensor->size());
  }
  return out;
}

void restore_params(Model& model, const std::vector<std::vector<double>>& snap) {
  const auto params = model.named_params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::copy(snap[i].begin(), snap[i].end(), params[i].tensor->data());
  }
}

}  // namespace

TrainResult run(Model& model, const data::Dataset& ds,
                std::span<const std::size_t> train_indices,
                std::span<const std::size_t> dev_indices, const TrainConfig& cfg) {
  if (cfg.batch_size == 0 || cfg.epochs == 0 || cfg.curve_interval == 0) {
    throw ArgumentError("train config: batch_size, epochs and curve_interval must be positive");
  }
  if (cfg.learning_rate <= 0.0) {
    throw ArgumentError("train config: learning rate must be positive");
  }
  std::vector<std::size_t> base(train_indices.begin(), train_indices.end());
  if (cfg.subset > 0 && cfg.subset < base.size()) base.resize(cfg.subset);
  if (base.empty()) throw ArgumentError("train: no training samples selected");

  Optimizer opt(cfg.optimizer, cfg.learning_rate);
  TrainResult result;
  std::vector<double> win_loss(cfg.curve_interval, 0.0);
  std::vector<std::uint8_t> win_correct(cfg.curve_interval, 0);
  std::size_t samples_seen = 0;

  std::vector<std::int32_t> ids(model.config().seq_len);
  ModelTrace trace;
  std::vector<std::vector<double>> best_snapshot;
  const bool track_best = !dev_indices.empty();
  double best_dev = -1.0;

  std::vector<std::size_t> order;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    order = base;
    Prng shuffle_rng(Prng::mix(cfg.seed, streams::kEpochShuffleBase + epoch));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - start);
      model.zero_grad();
      for (std::size_t b = 0; b < n; ++b) {
        const std::size_t idx = order[start + b];
        ds.ids_padded(idx, ids);
        const Tensor logits = model.forward(ids, trace);
        const auto label = static_cast<std::size_t>(ds.label(idx));
        auto sx = kernels::softmax_cross_entropy(logits, label);
        if (!std::isfinite(sx.loss)) {
          std::ostringstream msg;
          msg << "train: loss became non-finite at sample " << samples_seen + 1 << " of epoch "
              << epoch << "; lower the learning rate or shrink the initialization range";
          throw TrainingError(msg.str());
        }
        epoch_loss += sx.loss;
        for (std::size_t k = 0; k < sx.dlogits.size(); ++k) {
          sx.dlogits[k] /= static_cast<double>(n);  // mean-loss gradient
        }
        model.backward(sx.dlogits, trace);

        const std::size_t slot = samples_seen % cfg.curve_interval;
        win_loss[slot] = sx.loss;
        win_correct[slot] = kernels::argmax(logits) == label ? 1 : 0;
        ++samples_seen;
        if (samples_seen % cfg.curve_interval == 0) {
          double wloss = 0.0;
          std::size_t wcorrect = 0;
          for (std::size_t k = 0; k < cfg.curve_interval; ++k) {
            wloss += win_loss[k];
            wcorrect += win_correct[k];
          }
          const auto wn = static_cast<double>(cfg.curve_interval);
          result.curve.push_back(CurvePoint{samples_seen, wloss / wn,
                                            static_cast<double>(wcorrect) / wn});
        }
      }
      opt.step(model);
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.train_loss = epoch_loss / static_cast<double>(order.size());
    if (track_best) {
      const EvalResult dev = evaluate(model, ds, dev_indices);
      em.dev_loss = dev.mean_loss;
      em.dev_accuracy = dev.accuracy;
      if (dev.accuracy > best_dev) {
        best_dev = dev.accuracy;
        result.best_epoch = epoch;
        best_snapshot = snapshot_params(model);
      }
    }
    result.epochs.push_back(em);
  }

  if (track_best) {
    restore_params(model, best_snapshot);
    result.best_dev_accuracy = best_dev;
  }
  return result;
}

}  // namespace scnn::train
