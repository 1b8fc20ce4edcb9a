// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Kernel benchmark: OpenMP paths against the serial reference loops.
// Each pair is checked for agreement before timing, so a broken kernel
// shows up here as an error rather than a suspicious speedup.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dpopt/engine.hpp"
#include "dpopt/reference.hpp"
#include "dpopt/tensor.hpp"

using namespace dpopt;
using Clock = std::chrono::steady_clock;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = Clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  return best;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / (1.0 + std::abs(b[i])));
  return worst;
}

void row(const std::string& name, double serial_ms, double parallel_ms, double rel) {
  std::printf("%-24s %10.2f %12.2f %9.2fx %11.1e\n", name.c_str(), serial_ms, parallel_ms,
              serial_ms / parallel_ms, rel);
}

}  // namespace

int main() {
  const int reps = 5;
  RngState rng(7);

  std::printf("kernel benchmark, best of %d reps\n", reps);
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled, both columns run serial code\n");
#endif
  std::printf("%-24s %10s %12s %9s %11s\n", "kernel", "serial ms", "parallel ms", "speedup",
              "max rel diff");

  {
    Tensor a = gaussian(rng, {256, 256}, 1.0);
    Tensor b = gaussian(rng, {256, 256}, 1.0);
    Tensor got = matmul(a, b);
    Tensor want = reference::matmul_naive(a, b);
    double serial = time_best_of(reps, [&] { want = reference::matmul_naive(a, b); });
    double parallel = time_best_of(reps, [&] { got = matmul(a, b); });
    row("matmul 256x256x256", serial, parallel, max_rel_diff(got.data, want.data));
  }

  {
    Tensor a = gaussian(rng, {256, 256}, 1.0);
    Tensor b = gaussian(rng, {256, 256}, 1.0);
    Tensor got = matmul_nt(a, b);
    Tensor want = reference::matmul_nt_naive(a, b);
    double serial = time_best_of(reps, [&] { want = reference::matmul_nt_naive(a, b); });
    double parallel = time_best_of(reps, [&] { got = matmul_nt(a, b); });
    row("matmul_nt 256x256x256", serial, parallel, max_rel_diff(got.data, want.data));
  }

  {
    Tensor a = gaussian(rng, {256, 256}, 1.0);
    Tensor b = gaussian(rng, {256, 256}, 1.0);
    Tensor got = matmul_tn(a, b);
    Tensor want = reference::matmul_tn_naive(a, b);
    double serial = time_best_of(reps, [&] { want = reference::matmul_tn_naive(a, b); });
    double parallel = time_best_of(reps, [&] { got = matmul_tn(a, b); });
    row("matmul_tn 256x256x256", serial, parallel, max_rel_diff(got.data, want.data));
  }

  {
    Tensor t = gaussian(rng, {2048, 2048}, 1.0);
    double got = frobenius_norm_sq(t);
    double want = reference::frobenius_loop(t);
    double serial = time_best_of(reps, [&] { want = reference::frobenius_loop(t); });
    double parallel = time_best_of(reps, [&] { got = frobenius_norm_sq(t); });
    row("frobenius 4.2M", serial, parallel, max_rel_diff({got}, {want}));
  }

  {
    const int B = 32, T = 8, d = 128, p = 128;
    Tensor a = gaussian(rng, {B, T, d}, 1.0);
    Tensor g = gaussian(rng, {B, T, p}, 1.0);
    Tensor got = ghost_norm(a, g);

    // Serial route: materialize each per-sample gradient a_i^T G_i and take
    // its squared norm, the thing the ghost trick avoids.
    std::vector<double> want(B, 0.0);
    auto materialize = [&] {
      for (int i = 0; i < B; ++i) {
        double acc = 0.0;
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < p; ++c) {
            double w = 0.0;
            for (int t_i = 0; t_i < T; ++t_i)
              w += a.data[static_cast<size_t>((i * T + t_i) * d + r)] *
                   g.data[static_cast<size_t>((i * T + t_i) * p + c)];
            acc += w * w;
          }
        want[static_cast<size_t>(i)] = acc;
      }
    };
    materialize();
    double serial = time_best_of(reps, materialize);
    double parallel = time_best_of(reps, [&] { got = ghost_norm(a, g); });
    row("ghost-norm B32 T8 128^2", serial, parallel, max_rel_diff(got.data, want));
  }

  return 0;
}
