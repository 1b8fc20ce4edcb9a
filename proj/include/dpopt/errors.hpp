// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Exception hierarchy shared by all modules.

#pragma once

#include <stdexcept>
#include <string>

namespace dpopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape disagreement between tensors; the message names both shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Scalar argument outside its documented range (negative sigma, gamma <= 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Backward layers visited out of order.
class SchedulingError : public Error {
 public:
  using Error::Error;
};

// Invalid or unsupported grouping plan.
class PlanError : public Error {
 public:
  using Error::Error;
};

// Function argument outside its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Training failure; carries the step at which it happened.
class RunError : public Error {
 public:
  RunError(const std::string& msg, long long step_index)
      : Error(msg + " (step " + std::to_string(step_index) + ")"), step(step_index) {}
  long long step;
};

// Noise calibration cannot reach the requested target.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

// Problem instance too large for the requested exhaustive procedure.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Inputs violate the precondition of a verification procedure.
class SetupError : public Error {
 public:
  using Error::Error;
};

// Inputs violate a modeling assumption (e.g. asymmetric noise).
class AssumptionError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpopt
