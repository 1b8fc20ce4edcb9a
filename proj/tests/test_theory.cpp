// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dpopt/theory.hpp"
#include "dpopt/verify.hpp"

using namespace dpopt;

TEST_CASE("distance measure: frozen value, zero, monotonicity") {
  TheoryParams p;  // xi 1, gamma 0.01, r 2, M 1
  // Hand evaluation at x = 1: A = 1/2, so
  // 1 * (0.01 / (1.5 + 0.01) - 0.01 / (4.5 + 0.01)).
  CHECK(distance_measure_M(1.0, p) == doctest::Approx(0.004405221656069661).epsilon(1e-14));
  CHECK(distance_measure_M(0.0, p) == 0.0);
  double prev = 0.0;
  for (double x : {0.1, 0.5, 1.0, 3.0, 10.0, 100.0}) {
    double y = distance_measure_M(x, p);
    CHECK(y > prev);
    prev = y;
  }
  // Bounded above by the pole of the inverse domain.
  CHECK(prev < 2.0 * p.gamma / (p.r * p.r - 1.0));
  CHECK_THROWS_AS(distance_measure_M(-0.1, p), DomainError);
}

TEST_CASE("inverse: round trip, domain, slope") {
  TheoryParams p;
  p.xi = 0.7;
  p.gamma = 0.03;
  p.r = 1.8;
  p.M = 2;
  for (double x : {1e-4, 0.02, 0.3, 1.0, 4.0, 25.0}) {
    double y = distance_measure_M(x, p);
    CHECK(distance_measure_M_inverse(y, p) == doctest::Approx(x).epsilon(1e-10));
  }
  CHECK(distance_measure_M_inverse(0.0, p) == 0.0);
  double edge = 2.0 * p.gamma / (p.r * p.r - 1.0);
  CHECK_THROWS_AS(distance_measure_M_inverse(edge, p), DomainError);
  CHECK_THROWS_AS(distance_measure_M_inverse(-1e-9, p), DomainError);

  double want = distance_measure_inverse_slope(p);
  CHECK(distance_measure_M_inverse(1e-9, p) / 1e-9 == doctest::Approx(want).epsilon(1e-4));

  SuiteResult r = verify_measure_roundtrip(100, 5);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("parameter validation") {
  TheoryParams p;
  p.r = 1.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = TheoryParams{};
  p.gamma = 0.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = TheoryParams{};
  p.rho = 1.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = TheoryParams{};
  p.M = 0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
}

TEST_CASE("alignment lower bound holds on a few configurations") {
  TheoryParams p;
  p.xi = 0.8;
  p.r = 2.0;
  p.gamma = 0.02;
  RngState rng(17);
  Tensor g = gaussian(rng, {4}, 0.7);
  NoiseModel gaussian_model;
  RngState mc(100);
  LemmaCheck chk = lemma_lower_bound_check(g, p, gaussian_model, 200000, mc);
  INFO("lhs ", chk.lhs, " rhs ", chk.rhs, " se ", chk.se);
  CHECK(chk.pass);
  CHECK(chk.num_samples == 200000);
  CHECK(chk.se > 0.0);
  CHECK(mc.counter == 200000ULL * (2 * 4 + 2));  // stride = 2 dim + 2

  NoiseModel ball;
  ball.kind = NoiseModel::Kind::UniformBall;
  RngState mc2(101);
  CHECK(lemma_lower_bound_check(g, p, ball, 200000, mc2).pass);

  // Tiny gradient: the bound clamps to zero and holds trivially.
  Tensor small({2}, {1e-4, 0.0});
  RngState mc3(102);
  LemmaCheck tiny = lemma_lower_bound_check(small, p, NoiseModel{}, 10000, mc3);
  CHECK(tiny.rhs == 0.0);
  CHECK(tiny.pass);

  NoiseModel shifted;
  shifted.kind = NoiseModel::Kind::AsymmetricShifted;
  shifted.shift = 0.3;
  RngState mc4(103);
  CHECK_THROWS_AS(lemma_lower_bound_check(g, p, shifted, 1000, mc4), AssumptionError);
}

TEST_CASE("threshold dichotomy on a hand pair") {
  // |g_i^(1)| = 1 < 1.5 = |g_j^(1)| and |g_i| > R > |g_j|.
  TwoGroupSample gi{Tensor({1}, {1.0}), Tensor({1}, {2.0})};
  TwoGroupSample gj{Tensor({1}, {1.5}), Tensor({1}, {0.5})};
  ClipConfig abadi;
  abadi.function = ClipFunction::Abadi;
  std::vector<std::pair<double, double>> grid;
  for (int i = 1; i <= 8; ++i)
    for (int j = 1; j <= 8; ++j) grid.emplace_back(0.25 * i, 0.25 * j);

  CounterexampleReport rep = counterexample_verify(gi, gj, 1.8, abadi, grid);
  CHECK(!rep.representable);
  CHECK(rep.dichotomy_applicable);
  CHECK(rep.grid_total == 64);
  CHECK(rep.grid_matches == 0);
  CHECK(!rep.trace.empty());

  // Same geometry under normalized clipping: the required per-group scales
  // disagree across the two samples.
  ClipConfig auto_cfg;
  CounterexampleReport rep2 = counterexample_verify(gi, gj, 1.8, auto_cfg, grid);
  CHECK(!rep2.representable);
  CHECK(rep2.grid_matches == 0);

  // Reversed first-group ordering: representable, witness pinned by sample i.
  TwoGroupSample fi{Tensor({1}, {3.0}), Tensor({1}, {4.0})};
  TwoGroupSample fj{Tensor({1}, {2.0}), Tensor({1}, {0.0})};
  CounterexampleReport fixed = counterexample_verify(fi, fj, 4.0, abadi, {});
  CHECK(fixed.representable);
  CHECK(!fixed.dichotomy_applicable);
  CHECK(fixed.has_witness);
  CHECK(fixed.witness_r1 == doctest::Approx(2.4).epsilon(1e-14));
  CHECK(fixed.witness_r2 == doctest::Approx(3.2).epsilon(1e-14));

  // Identical samples short-circuit to representable for both functions.
  TwoGroupSample eq{Tensor({2}, {1.0, 2.0}), Tensor({1}, {3.0})};
  CHECK(counterexample_verify(eq, eq, 2.0, abadi, {}).representable);
  CHECK(counterexample_verify(eq, eq, 1.0, auto_cfg, {}).representable);

  // Precondition violations are refused, not silently classified.
  CHECK_THROWS_AS(counterexample_verify(gj, gi, 1.8, abadi, {}), SetupError);
  CHECK_THROWS_AS(counterexample_verify(gi, gj, 5.0, abadi, {}), SetupError);

  SuiteResult r = verify_counterexample(10, 3);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("convergence experiment shapes and pairing") {
  SyntheticTask task;
  task.kind = TaskKind::Logistic;
  task.dimension = 4;
  task.samples = 32;
  task.seed = 11;
  Dataset data = make_dataset(task);
  ArchitectureSpec arch = mlp_arch(4, 4, 2, 2, data.loss);

  std::vector<GroupingPlan> plans = {build_grouping(arch, GroupingStyle::AllLayer),
                                     build_grouping(arch, GroupingStyle::LayerWise)};
  ConvergenceOptions opts;
  opts.T = 40;
  opts.B = 8;
  opts.sigma_dp = 0.3;
  opts.eval_every = 5;
  ConvergenceSummary sum = convergence_experiment(data, arch, plans, {1, 2, 3}, opts);
  CHECK(sum.group_counts == std::vector<int>{1, 2});
  REQUIRE(sum.medians.size() == 2);
  REQUIRE(sum.runs.size() == 6);
  for (const auto& run : sum.runs) {
    CHECK(run.min_grad_norm > 0.0);
    CHECK(std::isfinite(run.min_grad_norm));
  }
  // Same seed, same group count -> identical result on reruns.
  ConvergenceSummary again = convergence_experiment(data, arch, plans, {1, 2, 3}, opts);
  for (size_t i = 0; i < sum.runs.size(); ++i)
    CHECK(sum.runs[i].min_grad_norm == again.runs[i].min_grad_norm);

  CHECK_THROWS_AS(convergence_experiment(data, arch, plans, {}, opts), ConfigError);
  ConvergenceOptions bad = opts;
  bad.B = 7;  // does not divide 32
  CHECK_THROWS_AS(convergence_experiment(data, arch, plans, {1}, bad), ConfigError);
}

TEST_CASE("baseline slope machinery") {
  SyntheticTask task;
  task.kind = TaskKind::Quadratic;
  task.dimension = 4;
  task.samples = 32;
  task.label_noise = 0.0;
  task.seed = 5;
  Dataset data = make_dataset(task);
  ArchitectureSpec arch = linear_arch(data);
  BaselineResult base = nondp_baseline(data, arch, {50, 200, 800}, 8, 2.0, {1, 2, 3});
  REQUIRE(base.T_values == std::vector<int>{50, 200, 800});
  REQUIRE(base.medians.size() == 3);
  for (double m : base.medians) CHECK(std::isfinite(m));
  CHECK(std::isfinite(base.slope));
  // A noise-free quadratic driven longer gets closer to stationarity.
  CHECK(base.medians.back() < base.medians.front());
  CHECK(base.slope < 0.0);
}

TEST_CASE("step-size numerator and smoothness probes") {
  TheoryParams p;  // smoothness 1, loss floor 0
  CHECK(proof_eta0(2.0, p, 0.0, 10, 4) == doctest::Approx(2.0).epsilon(1e-12));
  // Noise and dimension shrink the safe step.
  CHECK(proof_eta0(2.0, p, 1.0, 100, 4) < 2.0);
  CHECK_THROWS_AS(proof_eta0(0.0, p, 0.0, 10, 4), ParameterError);

  Dataset unit;
  unit.X = Tensor({2, 1, 2}, {1.0, 0.0, 0.0, 1.0});
  unit.Y = Tensor({2, 1, 1}, {0.0, 0.0});
  unit.loss = Loss::MeanSquaredError;
  CHECK(quadratic_smoothness(unit) == doctest::Approx(1.0).epsilon(1e-10));
  Dataset doubled = unit;
  for (auto& v : doubled.X.data) v *= 2.0;
  CHECK(quadratic_smoothness(doubled) == doctest::Approx(4.0).epsilon(1e-10));

  RngState rng(3);
  Model probe = Model::init(linear_arch(unit), rng);
  CHECK(std::isfinite(mean_gradient_norm(probe, unit)));
}
