// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Executable forms of the convergence analysis: the distance measure and its
// inverse, a Monte Carlo check of the normalized-gradient alignment bound,
// an exact verifier for whether all-layer clipping can be reproduced by
// group-wise thresholds, and the group-count convergence experiment with its
// non-private baseline.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dpopt/grouping.hpp"
#include "dpopt/scheduler.hpp"
#include "dpopt/synthetic.hpp"

namespace dpopt {

struct TheoryParams {
  double xi = 1.0;       // per-sample gradient noise scale
  double gamma = 0.01;   // normalization stability constant
  double r = 2.0;        // slack ratio splitting signal from noise, > 1
  int M = 1;             // number of clipping groups
  double smoothness = 1.0;
  double loss_floor = 0.0;
  double rho = 0.5;      // tail probability parameter, in (0, 1)
  double a = 1.0;        // free positive constant of the bound

  void validate() const;
};

// M(x) = x * (gamma / ((r-1)(x+A) + gamma) - gamma / ((r+1)(x+A) + gamma))
// with A = xi / (r sqrt(M)); nonnegative and strictly increasing on x >= 0.
double distance_measure_M(double x, const TheoryParams& p);

// Closed-form inverse on 0 <= y < 2 gamma / (r^2 - 1).
double distance_measure_M_inverse(double y, const TheoryParams& p);

// Slope of the inverse at y -> 0:
// (r^2 (xi/sqrt(M) + gamma)^2 - (xi/sqrt(M))^2) / (2 (xi/sqrt(M)) gamma r).
double distance_measure_inverse_slope(const TheoryParams& p);

struct NoiseModel {
  enum class Kind { GaussianIsotropic, UniformBall, AsymmetricShifted };
  Kind kind = Kind::GaussianIsotropic;
  double shift = 0.0;  // AsymmetricShifted only; breaks the symmetry assumption
};

struct LemmaCheck {
  double lhs = 0.0;  // Monte Carlo estimate of g^T E[(g + n) / (|g + n| + gamma)]
  double se = 0.0;   // standard error of the estimate
  double rhs = 0.0;  // M(|g| - xi / (r sqrt(M))) / 2, clamped to 0 below the kink
  bool pass = false; // lhs >= rhs - 3 se
  long long num_samples = 0;
};

// Draws n from the model scaled so E|n|^2 <= xi^2 / M, estimates the
// alignment, and compares against the closed-form lower bound. Chunked
// counter-addressed sampling keeps the estimate thread-count independent.
LemmaCheck lemma_lower_bound_check(const Tensor& g, const TheoryParams& p, const NoiseModel& model,
                                   long long num_samples, RngState& rng);

// A gradient split into its two group components.
struct TwoGroupSample {
  Tensor group1;
  Tensor group2;
};

struct CounterexampleReport {
  bool representable = false;
  bool dichotomy_applicable = false;  // |g_i^(1)| in (0, |g_j^(1)|), forcing non-representability
  bool has_witness = false;
  double witness_r1 = 0.0;
  double witness_r2 = 0.0;
  int grid_total = 0;
  int grid_matches = 0;
  std::vector<std::string> trace;
};

// Decides whether per-group thresholds (R1, R2) exist that make group-wise
// clipping reproduce all-layer clipping for BOTH samples: exactly via the
// per-group constraint system, by case split when the dichotomy applies, and
// empirically over the supplied candidate grid. Threshold clipping requires
// |g_i| > R > |g_j|; identical samples short-circuit to representable.
CounterexampleReport counterexample_verify(const TwoGroupSample& gi, const TwoGroupSample& gj,
                                           double R, const ClipConfig& clip,
                                           const std::vector<std::pair<double, double>>& grid);

// Norm of the dataset-mean gradient at the current weights.
double mean_gradient_norm(const Model& model, const Dataset& data);

struct ConvergenceOptions {
  int T = 2000;
  int B = 32;
  double sigma_dp = 0.5;
  double lr0 = 8.0;  // step size lr0 / (B sqrt(T))
  int eval_every = 10;
  ClipConfig clip;
};

struct ConvergenceRun {
  int num_groups = 1;
  uint64_t seed = 0;
  double min_grad_norm = 0.0;
};

struct ConvergenceSummary {
  std::vector<int> group_counts;  // one per plan
  std::vector<double> medians;    // median min-over-t mean-gradient norm per plan
  std::vector<ConvergenceRun> runs;
  bool trend_nondecreasing = false;  // along increasing group count, one-sided 20% tolerance
};

// Trains per (plan, seed) with the scheduled private step at a fixed noise
// multiplier, tracking the smallest full-dataset gradient norm seen at the
// evaluation cadence. Runs fan out in parallel; each is seeded by counter
// splitting, so results do not depend on thread count. Model initialization
// depends only on the seed and noise draws are shared across plans, keeping
// the group-count comparison paired.
ConvergenceSummary convergence_experiment(const Dataset& data, const ArchitectureSpec& arch,
                                          const std::vector<GroupingPlan>& plans,
                                          const std::vector<uint64_t>& seeds,
                                          const ConvergenceOptions& opts);

struct BaselineResult {
  std::vector<int> T_values;
  std::vector<double> medians;  // median min-over-t mean-gradient norm per horizon
  double slope = 0.0;           // least-squares slope of log10(median) on log10(T)
};

// Plain summed-gradient descent (no clipping, no noise) at step size
// lr0 / (B sqrt(T)); the minimum gradient norm should fall at least like a
// small negative power of T.
BaselineResult nondp_baseline(const Dataset& data, const ArchitectureSpec& arch,
                              const std::vector<int>& T_values, int B, double lr0,
                              const std::vector<uint64_t>& seeds);

// Step-size numerator from the descent bound:
// sqrt(2 (L0 - loss_floor) / (smoothness (1 + sigma^2 d / B^2))).
double proof_eta0(double initial_loss, const TheoryParams& p, double sigma_dp, int64_t dim, int B);

// Largest Hessian eigenvalue of the mean squared-error loss of a single
// linear layer on the dataset, via power iteration on X^T X.
double quadratic_smoothness(const Dataset& data);

}  // namespace dpopt
