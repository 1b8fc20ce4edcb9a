// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic task generators: smooth bounded-below losses with i.i.d. sample
// noise, small enough to train in seconds.

#pragma once

#include <cstdint>
#include <string>

#include "dpopt/engine.hpp"

namespace dpopt {

enum class TaskKind { Quadratic, Logistic, TwoLayerTeacher };

std::string to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

struct SyntheticTask {
  TaskKind kind = TaskKind::Quadratic;
  int dimension = 8;
  int samples = 64;
  double label_noise = 0.5;
  uint64_t seed = 1;

  void validate() const;
};

struct Dataset {
  Tensor X;  // [N, 1, D]
  Tensor Y;  // targets, shaped for the loss below
  Loss loss = Loss::MeanSquaredError;

  int num_samples() const { return X.rank() > 0 ? X.dim(0) : 0; }
  int feature_dim() const { return X.rank() == 3 ? X.dim(2) : 0; }
};

// Quadratic: linear targets plus noise, mean-squared error (loss floor 0 when
// noise-free). Logistic: a random halfspace with label flips from logit
// noise, two-class cross-entropy. TwoLayerTeacher: targets from a random
// tanh network plus noise, mean-squared error.
Dataset make_dataset(const SyntheticTask& task);

// Stack of width-wide tanh layers ending in a linear head; depth counts all
// layers including the head.
ArchitectureSpec mlp_arch(int in_dim, int width, int depth, int out_dim, Loss loss);

// Single linear layer matching the dataset shapes.
ArchitectureSpec linear_arch(const Dataset& data);

}  // namespace dpopt
