// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#include "dpopt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace dpopt {

int64_t shape_product(const std::vector<int>& shape) {
  int64_t n = 1;
  for (int s : shape) n *= s;
  return n;
}

std::string shape_str(const std::vector<int>& shape) {
  std::string out = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
  if (shape_product(shape) != static_cast<int64_t>(data.size()))
    throw DimensionError("tensor: shape " + shape_str(shape) + " does not match data length " +
                         std::to_string(data.size()));
}

namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngState RngState::substream(uint64_t tag) const {
  return RngState(mix64(seed + 0xD1B54A32D192ED03ULL * (tag + 1)));
}

uint64_t RngState::raw_at(uint64_t c) const { return mix64(seed + (c + 1) * kGolden); }

double RngState::unit_at(uint64_t c) const {
  // 53 random bits mapped to (0, 1]; never 0, so log() below stays finite.
  return static_cast<double>((raw_at(c) >> 11) + 1) * 0x1.0p-53;
}

double RngState::normal_at(uint64_t c) const {
  double u1 = unit_at(c);
  double u2 = unit_at(c + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void matmul_raw(const double* a, int64_t m, int64_t k, const double* b, int64_t n, double* c) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (int64_t j = 0; j < n; ++j) ci[j] = 0.0;
    const double* ai = a + i * k;
    for (int64_t kk = 0; kk < k; ++kk) {
      double aik = ai[kk];
      const double* bk = b + kk * n;
      for (int64_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
}

void matmul_nt_raw(const double* a, int64_t m, int64_t k, const double* b, int64_t n, double* c) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    for (int64_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (int64_t kk = 0; kk < k; ++kk) acc += ai[kk] * bj[kk];
      ci[j] = acc;
    }
  }
}

void matmul_tn_raw(const double* a, int64_t m, int64_t k, const double* b, int64_t n, double* c) {
#pragma omp parallel for schedule(static)
  for (int64_t kk = 0; kk < k; ++kk) {
    double* ck = c + kk * n;
    for (int64_t j = 0; j < n; ++j) ck[j] = 0.0;
    for (int64_t i = 0; i < m; ++i) {
      double aik = a[i * k + kk];
      const double* bi = b + i * n;
      for (int64_t j = 0; j < n; ++j) ck[j] += aik * bi[j];
    }
  }
}

namespace {

void require_matrix(const Tensor& t, const char* who) {
  if (t.rank() != 2)
    throw DimensionError(std::string(who) + ": expected a matrix, got shape " + shape_str(t.shape));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.dim(1) != b.dim(0))
    throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a.shape) + " x " +
                         shape_str(b.shape));
  Tensor c({a.dim(0), b.dim(1)});
  matmul_raw(a.ptr(), a.dim(0), a.dim(1), b.ptr(), b.dim(1), c.ptr());
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  if (a.dim(1) != b.dim(1))
    throw DimensionError("matmul_nt: inner dimensions disagree, " + shape_str(a.shape) + " x " +
                         shape_str(b.shape) + "^T");
  Tensor c({a.dim(0), b.dim(0)});
  matmul_nt_raw(a.ptr(), a.dim(0), a.dim(1), b.ptr(), b.dim(0), c.ptr());
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_tn");
  require_matrix(b, "matmul_tn");
  if (a.dim(0) != b.dim(0))
    throw DimensionError("matmul_tn: outer dimensions disagree, " + shape_str(a.shape) + "^T x " +
                         shape_str(b.shape));
  Tensor c({a.dim(1), b.dim(1)});
  matmul_tn_raw(a.ptr(), a.dim(0), a.dim(1), b.ptr(), b.dim(1), c.ptr());
  return c;
}

Tensor gaussian(RngState& rng, const std::vector<int>& shape, double sigma) {
  if (sigma < 0.0) throw ParameterError("gaussian: sigma must be nonnegative, got " + std::to_string(sigma));
  Tensor out(shape);
  int64_t n = out.size();
  if (sigma > 0.0) {
    double* p = out.ptr();
    uint64_t base = rng.counter;
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i)
      p[i] = sigma * rng.normal_at(base + 2 * static_cast<uint64_t>(i));
  }
  rng.counter += 2 * static_cast<uint64_t>(n);
  return out;
}

double frobenius_norm_sq(const Tensor& t) {
  double acc = 0.0;
  for (double v : t.data) acc += v * v;
  return acc;
}

Tensor take_rows(const Tensor& t, int start, int count) {
  if (t.size() == 0) return t;
  if (t.rank() < 1 || start < 0 || count < 0 || start + count > t.dim(0))
    throw DimensionError("take_rows: rows [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") out of range for " +
                         shape_str(t.shape));
  std::vector<int> shape = t.shape;
  shape[0] = count;
  int64_t row = shape_product(t.shape) / t.dim(0);
  Tensor out(shape);
  std::copy(t.ptr() + start * row, t.ptr() + (start + count) * row, out.ptr());
  return out;
}

}  // namespace dpopt
