// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Renyi-DP accounting for the Gaussian mechanism under composition, with
// conversion to (epsilon, delta) and noise calibration.
//
// Every step is treated as a full-batch Gaussian mechanism: there is no
// subsampling amplification, so reported epsilons are conservative upper
// bounds and exceed what an amplified accountant would report at small
// sampling rates.

#pragma once

#include <vector>

#include "dpopt/errors.hpp"

namespace dpopt {

struct PrivacyLedger {
  double sigma = 1.0;        // noise multiplier sigma_dp
  long long steps = 1;       // compositions
  double sensitivity = 1.0;  // l2 sensitivity, |R| of the threshold vector
  double delta = 1e-5;
  std::vector<double> alphas;  // Renyi orders, all > 1

  void validate() const;
};

// Orders 1.25, 1.5, ..., 5.0 plus 8, 16, 32, 64.
std::vector<double> default_alpha_grid();

// Gaussian-mechanism Renyi divergence at order alpha: alpha * sens^2 / (2 sigma^2).
double rdp_gaussian(double alpha, double sigma, double sensitivity);

struct EpsilonReport {
  double epsilon = 0.0;
  double best_alpha = 0.0;
};

// epsilon = min over the alpha grid of steps * rdp(alpha) + log(1/delta) / (alpha - 1).
EpsilonReport compose_and_convert(const PrivacyLedger& ledger);

// Smallest sigma (within 0.1% relative slack) whose accounted epsilon stays at
// or below target_eps. Search floor 1e-3, cap 1e6; targets below the grid's
// large-sigma limit raise CalibrationError.
double calibrate_sigma(double target_eps, double delta, long long steps, double sensitivity = 1.0,
                       const std::vector<double>& alphas = default_alpha_grid());

}  // namespace dpopt
