// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#include "dpopt/accountant.hpp"

#include <cmath>
#include <string>

namespace dpopt {

void PrivacyLedger::validate() const {
  if (!(sigma > 0.0)) throw ParameterError("privacy ledger: sigma must be positive");
  if (steps < 1) throw ParameterError("privacy ledger: steps must be at least 1");
  if (!(sensitivity > 0.0)) throw ParameterError("privacy ledger: sensitivity must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("privacy ledger: delta must lie in (0, 1)");
  if (alphas.empty()) throw ConfigError("privacy ledger: alpha grid must not be empty");
  for (double a : alphas)
    if (!(a > 1.0)) throw DomainError("privacy ledger: alpha orders must exceed 1");
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 16; ++k) grid.push_back(1.0 + 0.25 * k);
  for (double a : {8.0, 16.0, 32.0, 64.0}) grid.push_back(a);
  return grid;
}

double rdp_gaussian(double alpha, double sigma, double sensitivity) {
  if (!(alpha > 1.0)) throw DomainError("rdp_gaussian: alpha must exceed 1");
  if (!(sigma > 0.0)) throw ParameterError("rdp_gaussian: sigma must be positive");
  if (!(sensitivity > 0.0)) throw ParameterError("rdp_gaussian: sensitivity must be positive");
  return alpha * sensitivity * sensitivity / (2.0 * sigma * sigma);
}

EpsilonReport compose_and_convert(const PrivacyLedger& ledger) {
  ledger.validate();
  double tail = std::log(1.0 / ledger.delta);
  EpsilonReport best;
  bool first = true;
  for (double alpha : ledger.alphas) {
    double eps = static_cast<double>(ledger.steps) * rdp_gaussian(alpha, ledger.sigma, ledger.sensitivity) +
                 tail / (alpha - 1.0);
    if (first || eps < best.epsilon) {
      best.epsilon = eps;
      best.best_alpha = alpha;
      first = false;
    }
  }
  return best;
}

double calibrate_sigma(double target_eps, double delta, long long steps, double sensitivity,
                       const std::vector<double>& alphas) {
  if (!(target_eps > 0.0) || !std::isfinite(target_eps))
    throw ParameterError("calibrate_sigma: target epsilon must be positive and finite");

  constexpr double kSigmaFloor = 1e-3;
  constexpr double kSigmaCap = 1e6;
  constexpr double kRelSlack = 1e-3;

  PrivacyLedger ledger;
  ledger.steps = steps;
  ledger.sensitivity = sensitivity;
  ledger.delta = delta;
  ledger.alphas = alphas;

  auto eps_at = [&](double sigma) {
    ledger.sigma = sigma;
    return compose_and_convert(ledger).epsilon;
  };

  if (eps_at(kSigmaFloor) <= target_eps) return kSigmaFloor;

  // The conversion term alone lower-bounds epsilon for every sigma, so some
  // targets are unreachable no matter how large the noise.
  if (eps_at(kSigmaCap) > target_eps) {
    double limit = eps_at(kSigmaCap);
    throw CalibrationError("calibrate_sigma: target epsilon " + std::to_string(target_eps) +
                           " is below the smallest value " + std::to_string(limit) +
                           " reachable with the given alpha grid; extend the grid to larger "
                           "orders or raise the target");
  }

  double lo = kSigmaFloor;  // eps(lo) > target
  double hi = kSigmaCap;    // eps(hi) <= target
  // Tighten until the achieved epsilon sits within the relative slack below
  // the target, so calibrate -> account round-trips to 0.1%.
  for (int iter = 0; iter < 400 && eps_at(hi) < target_eps * (1.0 - 0.5 * kRelSlack); ++iter) {
    double mid = 0.5 * (lo + hi);
    if (eps_at(mid) <= target_eps)
      hi = mid;
    else
      lo = mid;
    if ((hi - lo) <= 1e-15 * hi) break;
  }
  return hi;
}

}  // namespace dpopt
