#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "scnn/data.hpp"
#include "scnn/model.hpp"

namespace scnn::train {

enum class OptimizerKind { kAdam, kSgd };
OptimizerKind optimizer_from_name(std::string_view name);  // "adam" | "sgd"
std::string_view optimizer_name(OptimizerKind kind);

struct TrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  std::size_t epochs = 10;
  std::uint64_t seed = 42;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::size_t curve_interval = 100;  // samples per learning-curve point
  std::size_t subset = 0;            // 0 = train on every sample
};

struct CurvePoint {
  std::size_t samples_seen = 0;
  double loss = 0.0;      // mean over the last curve_interval samples
  double accuracy = 0.0;  // same window
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  double dev_accuracy = 0.0;
};

struct EvalResult {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  std::size_t count = 0;
};

struct TrainResult {
  std::vector<CurvePoint> curve;
  std::vector<EpochMetrics> epochs;
  std::size_t best_epoch = 0;
  double best_dev_accuracy = 0.0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

void sgd_step(std::span<double> w, std::span<const double> g, double lr);

// First/second moment buffers for one parameter tensor; sized on first use.
struct AdamBuffers {
  std::vector<double> m, v;
};

// One Adam update with bias correction by the 1-based global step t.
void adam_step(std::span<double> w, std::span<const double> g, AdamBuffers& state,
               std::uint64_t t, double lr);

// Applies accumulated gradients to a model and zeroes them. Dense parameters
// take the full update; the embedding takes a sparse update where only rows
// with accumulated gradient touch their moment buffers (bias correction still
// uses the global step).
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr);
  void step(Model& model);
  std::uint64_t steps() const { return t_; }

 private:
  void attach(Model& model);

  OptimizerKind kind_;
  double lr_;
  std::uint64_t t_ = 0;
  bool attached_ = false;
  std::vector<AdamBuffers> dense_;
  AdamBuffers embedding_;
};

// Accuracy (argmax, ties to the lowest class) and mean loss. Pure: parameters
// are untouched. Throws ArgumentError on an empty dataset/selection.
EvalResult evaluate(const Model& model, const data::Dataset& ds);
EvalResult evaluate(const Model& model, const data::Dataset& ds,
                    std::span<const std::size_t> indices);

// Mini-batch training with mean-loss gradients and a per-sample learning
// curve: a point is emitted exactly when samples_seen crosses each multiple
// of curve_interval, carrying the running window's mean loss/accuracy.
// Each epoch reshuffles with the seed's per-epoch stream and ends with a dev
// evaluation; the best-dev parameters are restored before returning. Passing
// an empty dev selection skips dev evaluation and keeps the final parameters
// (handy for overfitting checks). Throws TrainingError when the loss leaves
// the finite range.
TrainResult run(Model& model, const data::Dataset& ds,
                std::span<const std::size_t> train_indices,
                std::span<const std::size_t> dev_indices, const TrainConfig& cfg);

}  // namespace scnn::train
