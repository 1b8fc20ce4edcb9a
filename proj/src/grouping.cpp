// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#include "dpopt/grouping.hpp"

#include <algorithm>
#include <cmath>

namespace dpopt {

std::string to_string(ClipFunction f) { return f == ClipFunction::Auto ? "auto" : "abadi"; }

std::string to_string(GroupingStyle s) {
  switch (s) {
    case GroupingStyle::AllLayer: return "all-layer";
    case GroupingStyle::Uniform: return "uniform";
    case GroupingStyle::LayerWise: return "layer-wise";
    case GroupingStyle::ParamWise: return "param-wise";
    case GroupingStyle::NonUniform: return "non-uniform";
  }
  return "all-layer";
}

ClipFunction clip_function_from_string(const std::string& s) {
  if (s == "auto") return ClipFunction::Auto;
  if (s == "abadi") return ClipFunction::Abadi;
  throw ConfigError("unknown clip function '" + s + "'");
}

GroupingStyle grouping_style_from_string(const std::string& s) {
  if (s == "all-layer") return GroupingStyle::AllLayer;
  if (s == "uniform") return GroupingStyle::Uniform;
  if (s == "layer-wise") return GroupingStyle::LayerWise;
  if (s == "param-wise") return GroupingStyle::ParamWise;
  if (s == "non-uniform") return GroupingStyle::NonUniform;
  throw ConfigError("unknown grouping style '" + s + "'");
}

ThresholdVector default_thresholds(int M) {
  return ThresholdVector(static_cast<size_t>(M), 1.0 / std::sqrt(static_cast<double>(M)));
}

void GroupingPlan::validate(int num_layers) const {
  if (M != static_cast<int>(groups.size()))
    throw PlanError("plan: M = " + std::to_string(M) + " but " + std::to_string(groups.size()) +
                    " groups given");
  if (static_cast<int>(R.size()) != M)
    throw PlanError("plan: " + std::to_string(R.size()) + " thresholds for M = " + std::to_string(M));
  std::vector<int> seen(static_cast<size_t>(num_layers), 0);
  for (const auto& g : groups) {
    if (g.empty()) throw PlanError("plan: empty group");
    for (int l : g) {
      if (l < 0 || l >= num_layers)
        throw PlanError("plan: layer " + std::to_string(l) + " outside [0, " +
                        std::to_string(num_layers) + ")");
      if (seen[static_cast<size_t>(l)]++) throw PlanError("plan: layer " + std::to_string(l) + " repeated");
    }
  }
  for (int l = 0; l < num_layers; ++l)
    if (!seen[static_cast<size_t>(l)]) throw PlanError("plan: layer " + std::to_string(l) + " not covered");
  for (double r : R)
    if (r < 0.0) throw PlanError("plan: negative threshold");
}

bool GroupingPlan::contiguous() const {
  for (const auto& g : groups) {
    for (size_t i = 1; i < g.size(); ++i)
      if (g[i] != g[i - 1] + 1) return false;
  }
  return true;
}

double GroupingPlan::threshold_norm() const {
  double acc = 0.0;
  for (double r : R) acc += r * r;
  return std::sqrt(acc);
}

std::vector<int64_t> GroupingPlan::group_param_counts(const ArchitectureSpec& arch) const {
  std::vector<int64_t> counts;
  for (const auto& g : groups) {
    int64_t n = 0;
    for (int l : g)
      n += static_cast<int64_t>(arch.layers[static_cast<size_t>(l)].d) * arch.layers[static_cast<size_t>(l)].p;
    counts.push_back(n);
  }
  return counts;
}

GroupingPlan GroupingPlan::from_json(const nlohmann::json& j) {
  GroupingPlan plan;
  plan.style = grouping_style_from_string(j.value("style", std::string("non-uniform")));
  if (!j.contains("groups") || !j["groups"].is_array())
    throw PlanError("plan: missing 'groups' array");
  for (const auto& g : j["groups"]) plan.groups.push_back(g.get<std::vector<int>>());
  plan.M = static_cast<int>(plan.groups.size());
  if (j.contains("R"))
    plan.R = j["R"].get<std::vector<double>>();
  else
    plan.R = default_thresholds(plan.M);
  return plan;
}

nlohmann::json GroupingPlan::to_json() const {
  nlohmann::json j;
  j["style"] = to_string(style);
  j["groups"] = groups;
  j["R"] = R;
  return j;
}

GroupingPlan build_grouping(const ArchitectureSpec& arch, GroupingStyle style,
                            const GroupingParams& params) {
  int L = arch.num_layers();
  GroupingPlan plan;
  plan.style = style;
  switch (style) {
    case GroupingStyle::AllLayer: {
      std::vector<int> all(static_cast<size_t>(L));
      for (int l = 0; l < L; ++l) all[static_cast<size_t>(l)] = l;
      plan.groups = {all};
      break;
    }
    case GroupingStyle::LayerWise:
    case GroupingStyle::ParamWise: {
      // One weight tensor per layer, so both styles induce the same partition.
      for (int l = 0; l < L; ++l) plan.groups.push_back({l});
      break;
    }
    case GroupingStyle::Uniform: {
      int k = params.k;
      if (k <= 0 || k > L)
        throw PlanError("plan: uniform group count " + std::to_string(k) + " outside [1, " +
                        std::to_string(L) + "]");
      int base = L / k, extra = L % k;
      int next = 0;
      for (int m = 0; m < k; ++m) {
        int len = base + (m < extra ? 1 : 0);
        std::vector<int> g;
        for (int i = 0; i < len; ++i) g.push_back(next++);
        plan.groups.push_back(std::move(g));
      }
      break;
    }
    case GroupingStyle::NonUniform: {
      const auto& b = params.boundaries;
      for (size_t i = 0; i < b.size(); ++i) {
        if (b[i] <= 0 || b[i] >= L || (i > 0 && b[i] <= b[i - 1]))
          throw PlanError("plan: boundaries must be strictly increasing inside (0, " +
                          std::to_string(L) + ")");
      }
      int start = 0;
      for (size_t i = 0; i <= b.size(); ++i) {
        int end = i < b.size() ? b[i] : L;
        std::vector<int> g;
        for (int l = start; l < end; ++l) g.push_back(l);
        plan.groups.push_back(std::move(g));
        start = end;
      }
      break;
    }
  }
  plan.M = static_cast<int>(plan.groups.size());
  plan.R = default_thresholds(plan.M);
  plan.validate(L);
  return plan;
}

double auto_clip_factor(double group_norm, const ClipConfig& cfg) {
  cfg.validate();
  if (group_norm < 0.0) throw ParameterError("auto_clip_factor: negative norm");
  return 1.0 / (group_norm + cfg.gamma);
}

double abadi_clip_factor(double group_norm, double R_m) {
  if (group_norm < 0.0 || R_m < 0.0) throw ParameterError("abadi_clip_factor: negative argument");
  if (group_norm == 0.0) return 1.0;
  return std::min(1.0, R_m / group_norm);
}

ClipFactors compute_clip_factors(const PerSampleNorms& norms, const GroupingPlan& plan,
                                 const ClipConfig& cfg) {
  ClipFactors factors(norms.B, plan.M);
  for (int m = 0; m < plan.M; ++m) {
    for (int l : plan.groups[static_cast<size_t>(m)])
      if (l < 0 || l >= norms.L)
        throw PlanError("clip factors: no norms for layer " + std::to_string(l));
    for (int i = 0; i < norms.B; ++i) {
      double nsq = 0.0;
      for (int l : plan.groups[static_cast<size_t>(m)]) nsq += norms.at(i, l);
      double norm = std::sqrt(nsq);
      factors.at(i, m) = cfg.function == ClipFunction::Auto
                             ? auto_clip_factor(norm, cfg)
                             : abadi_clip_factor(norm, plan.R[static_cast<size_t>(m)]);
    }
  }
  return factors;
}

double assembly_weight(const ClipFactors& factors, const GroupingPlan& plan, const ClipConfig& cfg,
                       int i, int m) {
  double c = factors.at(i, m);
  if (cfg.function == ClipFunction::Auto) return c / std::sqrt(static_cast<double>(plan.M));
  return c;
}

Tensor group_assembly_weights(const PerSampleNorms& norms, const GroupingPlan& plan,
                              const ClipConfig& cfg, int m) {
  Tensor weights({norms.B});
  double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(plan.M));
  for (int i = 0; i < norms.B; ++i) {
    double nsq = 0.0;
    for (int l : plan.groups[static_cast<size_t>(m)]) {
      if (l < 0 || l >= norms.L) throw PlanError("group weights: no norms for layer " + std::to_string(l));
      nsq += norms.at(i, l);
    }
    double norm = std::sqrt(nsq);
    weights.data[static_cast<size_t>(i)] =
        cfg.function == ClipFunction::Auto
            ? auto_clip_factor(norm, cfg) * inv_sqrt_m
            : abadi_clip_factor(norm, plan.R[static_cast<size_t>(m)]);
  }
  return weights;
}

double PrivateGradient::norm() const {
  double acc = 0.0;
  for (const Tensor& g : layer_grads) acc += frobenius_norm_sq(g);
  return std::sqrt(acc);
}

void add_noise(PrivateGradient& grad, double sigma_dp, RngState& rng) {
  double scale = sigma_dp * grad.sensitivity_norm;
  for (Tensor& g : grad.layer_grads) {
    Tensor noise = gaussian(rng, g.shape, scale);
    if (scale > 0.0)
      for (size_t k = 0; k < g.data.size(); ++k) g.data[k] += noise.data[k];
  }
}

PrivateGradient group_private_gradient(const PerSampleNorms& norms,
                                       const std::vector<Tensor>& activations,
                                       const std::vector<Tensor>& out_grads,
                                       const GroupingPlan& plan, const ClipConfig& cfg,
                                       double sigma_dp, RngState& rng) {
  if (sigma_dp < 0.0) throw ParameterError("group_private_gradient: negative sigma");
  if (activations.size() != out_grads.size() || static_cast<int>(activations.size()) != norms.L)
    throw PlanError("group_private_gradient: layer count mismatch between norms and tensors");
  plan.validate(norms.L);

  PrivateGradient out;
  out.noise_sigma = sigma_dp;
  out.sensitivity_norm = cfg.function == ClipFunction::Auto ? 1.0 : plan.threshold_norm();
  out.layer_grads.resize(activations.size());
  for (int m = 0; m < plan.M; ++m) {
    Tensor weights = group_assembly_weights(norms, plan, cfg, m);
    for (int l : plan.groups[static_cast<size_t>(m)])
      out.layer_grads[static_cast<size_t>(l)] =
          clipped_weight_grad(activations[static_cast<size_t>(l)], out_grads[static_cast<size_t>(l)], weights);
  }
  add_noise(out, sigma_dp, rng);
  return out;
}

}  // namespace dpopt
