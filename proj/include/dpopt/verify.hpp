// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Invariant suites comparing the fast paths against independent oracles.
// Default counts and tolerances are the acceptance settings and are pinned
// here, not in the callers.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dpopt {

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline constexpr uint64_t kVerifySeed = 20260814;

// Ghost norms against materialized per-sample gradients, 1e-10 relative.
SuiteResult verify_ghost_norm(int instances = 200, uint64_t seed = kVerifySeed);

// Scaled-sum weight gradients against explicit per-sample sums, 1e-10 relative.
SuiteResult verify_clipped_sum(int instances = 200, uint64_t seed = kVerifySeed);

// Scheduled private step against the materialize-everything oracle under a
// shared noise stream, 1e-10 relative.
SuiteResult verify_schedule_equivalence(int trials = 50, uint64_t seed = kVerifySeed);

// Instrumented ledger peaks against the closed-form peaks, exact equality.
SuiteResult verify_ledger_agreement(int trials = 50, uint64_t seed = kVerifySeed,
                                    int max_layers = 10);

// Homogeneous 12-layer uniform plans: max peak non-increasing in the group
// count, strictly smaller at 12 groups than at 1.
SuiteResult verify_peak_trend();

// Two-group boundary sweep on an asymmetric profile: interior minimizer,
// non-monotone sequence, and search result confirmed by instrumented runs.
SuiteResult verify_two_group_sweep();

// Distance-measure round trip (1e-8 absolute-plus-relative) and the
// small-argument slope of the inverse (1e-3 relative at y = 1e-6, 1e-7).
SuiteResult verify_measure_roundtrip(int trials = 1000, uint64_t seed = kVerifySeed);

// Monte Carlo alignment lower bound on random valid configurations; each must
// hold within three standard errors.
SuiteResult verify_lemma_bound(int configs = 50, long long draws = 1000000,
                               uint64_t seed = kVerifySeed);

// Random threshold-clipping pairs in the dichotomy configuration must be
// unrepresentable (analytically and on a candidate grid); random normalized
// pairs must fail the ratio-equality condition. demo_trace, when given,
// receives the trace of a fixed two-group example.
SuiteResult verify_counterexample(int pairs = 100, uint64_t seed = kVerifySeed,
                                  std::vector<std::string>* demo_trace = nullptr);

// Accountant monotonicity over a parameter grid, conversion validity,
// calibration round trips, and the pinned regression value.
SuiteResult verify_accountant();

// Known suite names in execution order.
std::vector<std::string> verify_suite_names();

// Runs one suite by name with default settings; unknown names raise ConfigError.
SuiteResult run_verify_suite(const std::string& name);

}  // namespace dpopt
