#pragma once

#include <cmath>
#include <vector>

#include "scnn/layers.hpp"
#include "scnn/prng.hpp"
#include "scnn/tensor.hpp"

namespace testsupport {

// Probe loss L = sum_k w_k * out_k. Linear in the output, so dL/dout = w and
// any gradient error in the layer shows up directly.
inline double probe_loss(const scnn::Tensor& out, const std::vector<double>& w) {
  double loss = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) loss += w[i] * out[i];
  return loss;
}

inline double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic) + std::abs(numeric));
}

struct GradCheck {
  double max_rel_err = 0.0;
  std::size_t checks = 0;

  void feed(double analytic, double numeric) {
    max_rel_err = std::max(max_rel_err, rel_err(analytic, numeric));
    ++checks;
  }
};

// Central-difference check of one layer instance at input x: every parameter
// element and every input element. Returns the worst relative error.
inline GradCheck gradcheck_layer(scnn::Layer& layer, const scnn::Tensor& x, scnn::Prng& rng,
                                 double h = 1e-6) {
  scnn::LayerContext ctx;
  const scnn::Tensor out = layer.forward(x, ctx);
  std::vector<double> w(out.size());
  for (auto& v : w) v = rng.uniform(-1.0, 1.0);

  for (auto& p : layer.params()) {
    p.tensor->ensure_grad();
    p.tensor->zero_grad();
  }
  scnn::Tensor g(out.shape(), w);
  const scnn::Tensor dx = layer.backward(g, ctx);

  GradCheck result;
  for (auto& p : layer.params()) {
    for (std::size_t i = 0; i < p.tensor->size(); ++i) {
      const double keep = (*p.tensor)[i];
      scnn::LayerContext scratch;
      (*p.tensor)[i] = keep + h;
      const double up = probe_loss(layer.forward(x, scratch), w);
      scratch.clear();
      (*p.tensor)[i] = keep - h;
      const double down = probe_loss(layer.forward(x, scratch), w);
      (*p.tensor)[i] = keep;
      result.feed(p.tensor->grad()[i], (up - down) / (2.0 * h));
    }
  }

  scnn::Tensor xp = x;
  for (std::size_t i = 0; i < xp.size(); ++i) {
    const double keep = xp[i];
    scnn::LayerContext scratch;
    xp[i] = keep + h;
    const double up = probe_loss(layer.forward(xp, scratch), w);
    scratch.clear();
    xp[i] = keep - h;
    const double down = probe_loss(layer.forward(xp, scratch), w);
    xp[i] = keep;
    result.feed(dx[i], (up - down) / (2.0 * h));
  }
  return result;
}

inline scnn::Tensor random_tensor(std::vector<std::size_t> shape, scnn::Prng& rng, double lo = -1.0,
                                  double hi = 1.0) {
  scnn::Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace testsupport
