// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Scheduled backward pass: output gradients are cached per group until the
// group's clipping factors are known, then clipped sums are formed and the
// caches freed. A ledger tracks live activation and output-gradient bytes.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dpopt/grouping.hpp"

namespace dpopt {

struct LedgerEvent {
  std::string tag;
  int64_t live_bytes = 0;
};

// Tracks exactly the per-layer input activations and output gradients, eight
// bytes per entry. Weights, optimizer state, pre-activation caches and
// transient workspaces are outside the model by definition.
struct MemoryLedger {
  std::vector<LedgerEvent> events;
  std::map<std::string, int64_t> live;
  int64_t live_bytes = 0;

  void alloc(const std::string& id, int64_t bytes);
  void release(const std::string& id);
  int64_t max_live() const;
  bool empty() const { return live.empty(); }
};

struct StepResult {
  PrivateGradient private_grad;
  MemoryLedger ledger;
  std::vector<int64_t> per_group_peaks;  // bytes, indexed like plan.groups
  int64_t max_peak = 0;
  double loss = 0.0;       // summed per-sample losses of the batch
  double grad_norm = 0.0;  // Frobenius norm of the noised private gradient
};

// One scheduled private-gradient step. Backward walks layers from the top;
// at each layer the output gradient and its ghost norm are produced; when the
// backward pass finishes a group's lowest layer, the group's factors are
// computed, its clipped sums formed, and its cached tensors freed. Noise is
// added once per layer after the walk.
StepResult dp_step(const Model& model, const Tensor& batch, const Tensor& targets,
                   const GroupingPlan& plan, const ClipConfig& cfg, double sigma_dp, RngState& rng,
                   bool keep_ledger_events = true);

enum class Optimizer { Sgd, AdamW };

Optimizer optimizer_from_string(const std::string& s);
std::string to_string(Optimizer o);

struct TrainOptions {
  Optimizer optimizer = Optimizer::Sgd;
  int epochs = 1;
  int logical_batch = 32;
  int virtual_batch = 0;  // 0 means equal to logical_batch
  double lr = 0.1;
  double weight_decay = 0.0;
  // AdamW moment decay rates and epsilon are fixed.
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kAdamEps = 1e-8;
};

struct TrajectoryRow {
  long long step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  int64_t max_peak_bytes = 0;
  std::vector<int64_t> per_group_peaks;
};

struct TrainResult {
  std::vector<TrajectoryRow> trajectory;
  Model model;
};

// Runs logical steps over the dataset in order (no shuffling); each logical
// batch is processed as virtual micro-batches whose clipped sums accumulate
// before a single noise draw. Non-finite losses or weights raise RunError
// with the failing step index. A trailing partial batch is skipped.
TrainResult train(const Model& model, const Tensor& data, const Tensor& targets,
                  const GroupingPlan& plan, const ClipConfig& cfg, double sigma_dp,
                  const TrainOptions& opts, RngState& rng);

}  // namespace dpopt
