// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Grouping plans over layers, clipping factors (auto and threshold forms),
// and assembly of the noised group private gradient.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dpopt/engine.hpp"

namespace dpopt {

enum class ClipFunction { Auto, Abadi };
enum class GroupingStyle { AllLayer, Uniform, LayerWise, ParamWise, NonUniform };

std::string to_string(ClipFunction f);
std::string to_string(GroupingStyle s);
ClipFunction clip_function_from_string(const std::string& s);
GroupingStyle grouping_style_from_string(const std::string& s);

struct ClipConfig {
  double gamma = 0.01;
  ClipFunction function = ClipFunction::Auto;

  void validate() const {
    if (gamma <= 0.0) throw ParameterError("clip config: gamma must be positive");
  }
};

using ThresholdVector = std::vector<double>;

// R_m = 1/sqrt(M) for every group, so the threshold vector has unit norm and
// the per-coordinate noise scale is sigma_dp regardless of M.
ThresholdVector default_thresholds(int M);

struct GroupingPlan {
  int M = 1;
  std::vector<std::vector<int>> groups;  // ascending layer indices per group
  GroupingStyle style = GroupingStyle::AllLayer;
  ThresholdVector R;

  void validate(int num_layers) const;  // exact partition or PlanError
  bool contiguous() const;              // every group a contiguous index range
  double threshold_norm() const;
  std::vector<int64_t> group_param_counts(const ArchitectureSpec& arch) const;

  static GroupingPlan from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct GroupingParams {
  int k = 1;                    // uniform: number of groups
  std::vector<int> boundaries;  // non-uniform: split points, strictly increasing in (0, L)
};

// Uniform splits put the remainder on the earliest groups.
GroupingPlan build_grouping(const ArchitectureSpec& arch, GroupingStyle style,
                            const GroupingParams& params = {});

// Factors without the 1/sqrt(M) assembly scale: 1/(norm + gamma), in (0, 1/gamma].
double auto_clip_factor(double group_norm, const ClipConfig& cfg);
// min(1, R_m / norm); a zero-norm sample is left unscaled.
double abadi_clip_factor(double group_norm, double R_m);

struct ClipFactors {
  int B = 0;
  int M = 0;
  std::vector<double> C;  // row-major [B x M]

  ClipFactors() = default;
  ClipFactors(int b, int m) : B(b), M(m), C(static_cast<size_t>(b) * m, 0.0) {}
  double& at(int i, int m) { return C[static_cast<size_t>(i) * M + m]; }
  double at(int i, int m) const { return C[static_cast<size_t>(i) * M + m]; }
};

// Group norms from per-layer norms, |g_i^(m)| = sqrt(sum over the group's
// layers), then one factor per (sample, group).
ClipFactors compute_clip_factors(const PerSampleNorms& norms, const GroupingPlan& plan,
                                 const ClipConfig& cfg);

// Per-sample weight applied to sample i's gradient in group m when its
// clipped contribution is assembled. Auto folds in the 1/sqrt(M) scale.
double assembly_weight(const ClipFactors& factors, const GroupingPlan& plan, const ClipConfig& cfg,
                       int i, int m);

// The full weight vector for one group, computed from the group's aggregated
// per-layer norms. norms only needs valid entries for the group's layers.
Tensor group_assembly_weights(const PerSampleNorms& norms, const GroupingPlan& plan,
                              const ClipConfig& cfg, int m);

struct PrivateGradient {
  std::vector<Tensor> layer_grads;  // [d_l, p_l] per layer
  double noise_sigma = 0.0;         // sigma_dp
  double sensitivity_norm = 1.0;    // |R| entering the noise scale (1 for auto)

  double norm() const;
};

// Adds one noise tensor per layer in ascending layer order; runs with
// sigma_dp = 0 consume the same counter positions.
void add_noise(PrivateGradient& grad, double sigma_dp, RngState& rng);

// Clipped sums for every layer from cached activations and output gradients,
// plus noise. The scheduled path produces the same values with a different
// computation order.
PrivateGradient group_private_gradient(const PerSampleNorms& norms,
                                       const std::vector<Tensor>& activations,
                                       const std::vector<Tensor>& out_grads,
                                       const GroupingPlan& plan, const ClipConfig& cfg,
                                       double sigma_dp, RngState& rng);

}  // namespace dpopt
