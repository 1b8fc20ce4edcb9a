// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: one JSON document describing architecture, grouping
// plans, training, privacy budget, clipping and data source.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpopt/grouping.hpp"
#include "dpopt/scheduler.hpp"
#include "dpopt/synthetic.hpp"

namespace dpopt {

struct PlanSpec {
  GroupingStyle style = GroupingStyle::AllLayer;
  GroupingParams params;

  GroupingPlan build(const ArchitectureSpec& arch) const {
    return build_grouping(arch, style, params);
  }

  static PlanSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct RunConfig {
  ArchitectureSpec arch;
  std::vector<PlanSpec> plans;
  TrainOptions train;
  ClipConfig clip;
  std::optional<double> target_eps;
  std::optional<double> sigma_dp;
  double delta = 1e-5;
  std::optional<SyntheticTask> task;
  std::optional<std::string> csv_path;
  std::vector<uint64_t> seeds = {1};
  std::string out_dir = "runs";

  // Every violated invariant raises ConfigError naming the field.
  void validate() const;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
};

// Header row, float feature columns, one integer column named "label".
Dataset load_csv_dataset(const std::string& path);

// The configured dataset: CSV when given, otherwise the synthetic task
// (defaulted when absent).
Dataset resolve_dataset(const RunConfig& cfg);

// Explicit sigma when set, otherwise calibrated from the epsilon target at
// unit sensitivity over the given number of composed steps.
double resolve_sigma(const RunConfig& cfg, long long steps);

}  // namespace dpopt
