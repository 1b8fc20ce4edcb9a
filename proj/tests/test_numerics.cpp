// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dpopt/reference.hpp"
#include "dpopt/tensor.hpp"

using namespace dpopt;

TEST_CASE("tensor construction") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  for (double v : t.data) CHECK(v == 0.0);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0}), DimensionError);
  CHECK(shape_product({2, 3, 4}) == 24);
}

TEST_CASE("matmul kernels match the naive loops") {
  RngState rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    int m = 1 + static_cast<int>(rng.next_u64() % 17);
    int k = 1 + static_cast<int>(rng.next_u64() % 17);
    int n = 1 + static_cast<int>(rng.next_u64() % 17);
    Tensor a = gaussian(rng, {m, k}, 1.0);
    Tensor b = gaussian(rng, {k, n}, 1.0);
    Tensor bt = gaussian(rng, {n, k}, 1.0);
    Tensor at = gaussian(rng, {m, k}, 1.0);

    Tensor c1 = matmul(a, b), r1 = reference::matmul_naive(a, b);
    Tensor c2 = matmul_nt(a, bt), r2 = reference::matmul_nt_naive(a, bt);
    Tensor c3 = matmul_tn(at, a), r3 = reference::matmul_tn_naive(at, a);
    for (int64_t i = 0; i < c1.size(); ++i)
      CHECK(c1.data[static_cast<size_t>(i)] ==
            doctest::Approx(r1.data[static_cast<size_t>(i)]).epsilon(1e-12));
    for (int64_t i = 0; i < c2.size(); ++i)
      CHECK(c2.data[static_cast<size_t>(i)] ==
            doctest::Approx(r2.data[static_cast<size_t>(i)]).epsilon(1e-12));
    for (int64_t i = 0; i < c3.size(); ++i)
      CHECK(c3.data[static_cast<size_t>(i)] ==
            doctest::Approx(r3.data[static_cast<size_t>(i)]).epsilon(1e-12));
  }
  Tensor a({2, 3}), bad({2, 3});
  CHECK_THROWS_AS(matmul(a, bad), DimensionError);
}

#ifdef _OPENMP
TEST_CASE("kernel results do not depend on the thread count") {
  RngState rng(11);
  Tensor a = gaussian(rng, {40, 33}, 1.0);
  Tensor b = gaussian(rng, {33, 29}, 1.0);
  int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  Tensor c1 = matmul(a, b);
  double f1 = frobenius_norm_sq(c1);
  omp_set_num_threads(4);
  Tensor c4 = matmul(a, b);
  double f4 = frobenius_norm_sq(c4);
  omp_set_num_threads(saved);
  CHECK(c1.data == c4.data);  // bitwise
  CHECK(f1 == f4);
}
#endif

TEST_CASE("counter-addressed rng") {
  RngState rng(42);
  CHECK(rng.raw_at(5) == rng.raw_at(5));
  CHECK(rng.raw_at(5) != rng.raw_at(6));
  RngState s1 = rng.substream(1), s2 = rng.substream(2);
  CHECK(s1.raw_at(0) != s2.raw_at(0));
  CHECK(rng.counter == 0);  // substream does not disturb the parent

  uint64_t before = rng.counter;
  rng.next_normal();
  CHECK(rng.counter == before + 2);

  for (int i = 0; i < 1000; ++i) {
    double u = rng.next_unit();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}

TEST_CASE("gaussian draws: moments and the sigma-zero contract") {
  RngState rng(3);
  Tensor g = gaussian(rng, {50000}, 1.0);
  double mean = 0.0, var = 0.0;
  for (double v : g.data) mean += v;
  mean /= static_cast<double>(g.size());
  for (double v : g.data) var += (v - mean) * (v - mean);
  var /= static_cast<double>(g.size() - 1);
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.03));

  RngState a(9), b(9);
  Tensor z = gaussian(a, {3, 4}, 0.0);
  for (double v : z.data) CHECK(v == 0.0);
  gaussian(b, {3, 4}, 1.0);
  CHECK(a.counter == b.counter);  // zero sigma still consumes the stream

  CHECK_THROWS_AS(gaussian(a, {2}, -1.0), ParameterError);
}

TEST_CASE("replay: same seed and counter give the same tensor") {
  RngState a(123), b(123);
  Tensor t1 = gaussian(a, {7, 5}, 0.3);
  Tensor t2 = gaussian(b, {7, 5}, 0.3);
  CHECK(t1.data == t2.data);
}

TEST_CASE("frobenius norm matches the reference loop") {
  RngState rng(21);
  Tensor t = gaussian(rng, {9, 4, 3}, 2.0);
  CHECK(frobenius_norm_sq(t) == doctest::Approx(reference::frobenius_loop(t)).epsilon(1e-12));
}

TEST_CASE("take_rows") {
  Tensor t({4, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
  Tensor mid = take_rows(t, 1, 2);
  CHECK(mid.shape == std::vector<int>{2, 2});
  CHECK(mid.data == std::vector<double>{3, 4, 5, 6});
  Tensor empty;
  CHECK(take_rows(empty, 0, 3).size() == 0);
  CHECK_THROWS_AS(take_rows(t, 3, 2), DimensionError);
}
