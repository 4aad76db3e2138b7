#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "scnn/kernels.hpp"
#include "scnn/prng.hpp"
#include "scnn/tensor.hpp"

// Times the OpenMP kernels against their serial reference twins and checks
// that the outputs match bit for bit (the parallel contract: threads only
// split independent outputs, reduction order is fixed).

namespace {

using scnn::Prng;
using scnn::Tensor;
namespace kernels = scnn::kernels;

Tensor random_tensor(std::vector<std::size_t> shape, Prng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
  return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

struct Case {
  const char* name;
  std::function<Tensor()> serial;
  std::function<Tensor()> parallel;
};

void run_case(const Case& c, int reps) {
  using Clock = std::chrono::steady_clock;
  Tensor ref = c.serial();  // warm-up + reference output
  Tensor par = c.parallel();
  const double diff = max_abs_diff(ref, par);

  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) ref = c.serial();
  const auto t1 = Clock::now();
  for (int r = 0; r < reps; ++r) par = c.parallel();
  const auto t2 = Clock::now();

  const double serial_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
  const double parallel_ms =
      std::chrono::duration<double, std::milli>(t2 - t1).count() / reps;
  std::printf("%-22s %10.3f ms %10.3f ms %8.2fx   max|diff| = %g\n", c.name, serial_ms,
              parallel_ms, serial_ms / parallel_ms, diff);
}

}  // namespace

int main() {
  Prng rng(20240901);

  // Shapes mirror the real workloads: the text-cnn convolution, the big
  // mlp/lstm matvecs, and the wide elementwise ops.
  const Tensor conv_in = random_tensor({140, 100}, rng);
  const Tensor conv_k = random_tensor({20, 100, 100}, rng);
  const Tensor conv_b = random_tensor({20}, rng);
  const Tensor conv_gout = random_tensor({20, 41, 1}, rng);
  const Tensor mat_w = random_tensor({512, 14000}, rng);
  const Tensor mat_x = random_tensor({14000}, rng);
  const Tensor mat_g = random_tensor({512}, rng);
  const Tensor wide_a = random_tensor({1u << 21}, rng);
  const Tensor wide_b = random_tensor({1u << 21}, rng);
  const Tensor outer_x = random_tensor({300}, rng);
  const Tensor outer_s = random_tensor({300}, rng);
  const Tensor pool_in = random_tensor({20, 410, 10}, rng);

  const std::vector<Case> cases = {
      {"conv2d_forward",
       [&] {
         Tensor out({20, 41, 1});
         kernels::serial::conv2d_forward(conv_in, conv_k, conv_b, out);
         return out;
       },
       [&] {
         Tensor out({20, 41, 1});
         kernels::conv2d_forward(conv_in, conv_k, conv_b, out);
         return out;
       }},
      {"conv2d_input_grad",
       [&] {
         Tensor din({140, 100});
         kernels::serial::conv2d_input_grad(conv_k, conv_gout, din);
         return din;
       },
       [&] {
         Tensor din({140, 100});
         kernels::conv2d_input_grad(conv_k, conv_gout, din);
         return din;
       }},
      {"matvec 512x14000",
       [&] {
         Tensor y({512});
         kernels::serial::matvec(mat_w, mat_x, y);
         return y;
       },
       [&] {
         Tensor y({512});
         kernels::matvec(mat_w, mat_x, y);
         return y;
       }},
      {"matvec_transpose",
       [&] {
         Tensor dx({14000});
         kernels::serial::matvec_transpose(mat_w, mat_g, dx);
         return dx;
       },
       [&] {
         Tensor dx({14000});
         kernels::matvec_transpose(mat_w, mat_g, dx);
         return dx;
       }},
      {"outer 300x300", [&] { return kernels::serial::outer(outer_x, outer_s); },
       [&] { return kernels::outer(outer_x, outer_s); }},
      {"add 2M", [&] { return kernels::serial::add(wide_a, wide_b); },
       [&] { return kernels::add(wide_a, wide_b); }},
      {"relu 2M", [&] { return kernels::serial::relu(wide_a); },
       [&] { return kernels::relu(wide_a); }},
      {"maxpool2d 20x410x10",
       [&] {
         Tensor out({20, 21, 1});
         std::vector<std::size_t> idx;
         kernels::serial::maxpool2d_forward(pool_in, 20, out, idx);
         return out;
       },
       [&] {
         Tensor out({20, 21, 1});
         std::vector<std::size_t> idx;
         kernels::maxpool2d_forward(pool_in, 20, out, idx);
         return out;
       }},
  };

  std::printf("%-22s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");
  for (const auto& c : cases) run_case(c, 20);
  std::printf("\nA max|diff| other than 0 means the parallel contract is broken.\n");
  return 0;
}
