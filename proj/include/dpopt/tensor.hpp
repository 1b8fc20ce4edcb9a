// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense row-major double tensors, deterministic matmul kernels and a
// counter-addressed random number generator.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpopt/errors.hpp"

namespace dpopt {

int64_t shape_product(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(shape_product(shape), 0.0) {}
  Tensor(std::vector<int> s, std::vector<double> d);

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }

  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }
};

// Counter-addressed generator: the value at (seed, counter) is a pure function
// of both, so streams can be split and replayed without shared state. The
// unsigned stream is bit-stable across platforms; double-valued outputs use
// libm transcendentals and are bit-stable for a fixed toolchain.
struct RngState {
  uint64_t seed = 0;
  uint64_t counter = 0;

  RngState() = default;
  explicit RngState(uint64_t s, uint64_t c = 0) : seed(s), counter(c) {}

  // Derives an independent stream; does not disturb this state.
  RngState substream(uint64_t tag) const;

  uint64_t raw_at(uint64_t c) const;
  double unit_at(uint64_t c) const;    // uniform on (0, 1]
  double normal_at(uint64_t c) const;  // consumes counters c and c+1

  uint64_t next_u64() { return raw_at(counter++); }
  double next_unit() { return unit_at(counter++); }
  double next_normal() {
    double z = normal_at(counter);
    counter += 2;
    return z;
  }
};

// c[m,n] = a[m,k] * b[k,n]; contraction runs over ascending k for every output
// entry, so results do not depend on the number of threads.
void matmul_raw(const double* a, int64_t m, int64_t k, const double* b, int64_t n, double* c);
// c[m,n] = a[m,k] * b[n,k]^T
void matmul_nt_raw(const double* a, int64_t m, int64_t k, const double* b, int64_t n, double* c);
// c[k,n] = a[m,k]^T * b[m,n]; contraction over ascending m.
void matmul_tn_raw(const double* a, int64_t m, int64_t k, const double* b, int64_t n, double* c);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);

// i.i.d. N(0, sigma^2) samples; sigma = 0 yields exact zeros. Always advances
// the counter by 2 * #entries so noisy and noise-free runs consume identical
// stream positions.
Tensor gaussian(RngState& rng, const std::vector<int>& shape, double sigma);

double frobenius_norm_sq(const Tensor& t);

// Copy of rows [start, start + count) along the leading axis. An empty tensor
// passes through unchanged so absent targets stay absent.
Tensor take_rows(const Tensor& t, int start, int count);

}  // namespace dpopt
