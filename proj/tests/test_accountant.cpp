// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dpopt/accountant.hpp"
#include "dpopt/verify.hpp"

using namespace dpopt;

namespace {

double eps_of(double sigma, long long steps, double delta) {
  PrivacyLedger ledger;
  ledger.sigma = sigma;
  ledger.steps = steps;
  ledger.delta = delta;
  ledger.alphas = default_alpha_grid();
  return compose_and_convert(ledger).epsilon;
}

}  // namespace

TEST_CASE("divergence closed form") {
  CHECK(rdp_gaussian(2.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rdp_gaussian(2.0, 2.0, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
  // Quadratic in the sensitivity, inverse-quadratic in sigma.
  CHECK(rdp_gaussian(3.0, 1.5, 2.0) ==
        doctest::Approx(4.0 * rdp_gaussian(3.0, 1.5, 1.0)).epsilon(1e-15));
  CHECK(rdp_gaussian(3.0, 3.0, 1.0) ==
        doctest::Approx(rdp_gaussian(3.0, 1.5, 1.0) / 4.0).epsilon(1e-15));
  CHECK_THROWS_AS(rdp_gaussian(1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(rdp_gaussian(2.0, 0.0, 1.0), ParameterError);
}

TEST_CASE("composition and conversion") {
  // One step, sigma 1, delta 1e-5: the order-5 conversion wins on the default
  // grid, epsilon = 5/2 + ln(1e5)/4.
  EpsilonReport rep;
  PrivacyLedger ledger;
  ledger.alphas = default_alpha_grid();
  rep = compose_and_convert(ledger);
  CHECK(rep.epsilon == doctest::Approx(5.378231366242558).epsilon(1e-14));
  CHECK(rep.best_alpha == doctest::Approx(5.0));

  // The divergence composes linearly in the step count, so doubling steps
  // never more than doubles epsilon.
  double e1 = eps_of(1.0, 10, 1e-5), e2 = eps_of(1.0, 20, 1e-5);
  CHECK(e2 > e1);
  CHECK(e2 <= 2.0 * e1 + 1e-12);

  PrivacyLedger bad;
  bad.sigma = -1.0;
  CHECK_THROWS_AS(compose_and_convert(bad), ParameterError);
  PrivacyLedger bad2;
  bad2.delta = 1.5;
  CHECK_THROWS_AS(compose_and_convert(bad2), ParameterError);
  PrivacyLedger bad3;
  bad3.steps = 0;
  CHECK_THROWS_AS(compose_and_convert(bad3), ParameterError);
  PrivacyLedger bad4;
  bad4.alphas = {0.5, 2.0};
  CHECK_THROWS_AS(compose_and_convert(bad4), DomainError);
}

TEST_CASE("default grid") {
  std::vector<double> grid = default_alpha_grid();
  REQUIRE(!grid.empty());
  CHECK(grid.front() == doctest::Approx(1.25));
  CHECK(grid.back() == doctest::Approx(64.0));
  for (size_t i = 0; i + 1 < grid.size(); ++i) CHECK(grid[i] < grid[i + 1]);
}

TEST_CASE("calibration") {
  for (double target : {0.5, 2.0, 6.0}) {
    double sigma = calibrate_sigma(target, 1e-5, 100);
    double achieved = eps_of(sigma, 100, 1e-5);
    CHECK(achieved <= target + 1e-12);
    CHECK(achieved >= target * (1.0 - 1e-3));
  }
  // Smaller budgets need more noise.
  CHECK(calibrate_sigma(0.5, 1e-5, 10) > calibrate_sigma(2.0, 1e-5, 10));
  // Absurdly loose budget: the search floor comes back.
  CHECK(calibrate_sigma(1e6, 1e-5, 1) == 1e-3);
  // Below what the conversion grid can express.
  CHECK_THROWS_AS(calibrate_sigma(0.05, 1e-5, 1), CalibrationError);
  CHECK_THROWS_AS(calibrate_sigma(-1.0, 1e-5, 1), ParameterError);
}

TEST_CASE("full grid suite") {
  SuiteResult r = verify_accountant();
  INFO(r.detail);
  CHECK(r.pass);
}
