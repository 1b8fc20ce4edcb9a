// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#include "dpopt/memory_planner.hpp"

#include <algorithm>

namespace dpopt {

namespace {

// Prefix sums of activation and output-gradient float counts per layer.
struct LayerSums {
  std::vector<int64_t> act;   // act[h] = sum_{l<=h} T_l d_l
  std::vector<int64_t> grad;  // grad[h] = sum_{l<=h} T_l p_l

  explicit LayerSums(const ArchitectureSpec& arch) {
    int64_t a = 0, g = 0;
    for (const auto& l : arch.layers) {
      a += static_cast<int64_t>(l.T) * l.d;
      g += static_cast<int64_t>(l.T) * l.p;
      act.push_back(a);
      grad.push_back(g);
    }
  }

  int64_t group_peak(int lo, int hi, int B) const {
    int64_t grads = grad[static_cast<size_t>(hi)] - (lo > 0 ? grad[static_cast<size_t>(lo - 1)] : 0);
    return B * (act[static_cast<size_t>(hi)] + grads);
  }
};

std::vector<int> plan_boundaries(const GroupingPlan& plan) {
  std::vector<int> starts;
  for (const auto& g : plan.groups) starts.push_back(g.front());
  std::sort(starts.begin(), starts.end());
  starts.erase(starts.begin());  // drop the leading zero
  return starts;
}

GroupingPlan plan_from_boundaries(const ArchitectureSpec& arch, const std::vector<int>& bounds) {
  if (bounds.empty()) return build_grouping(arch, GroupingStyle::AllLayer);
  GroupingParams params;
  params.boundaries = bounds;
  return build_grouping(arch, GroupingStyle::NonUniform, params);
}

PeakReport report_from_sums(const LayerSums& sums, const GroupingPlan& plan, int B) {
  PeakReport report;
  for (const auto& g : plan.groups) {
    int lo = g.front(), hi = g.back();
    report.per_group_peaks.push_back(static_cast<double>(sums.group_peak(lo, hi, B)));
  }
  report.max_peak = 0.0;
  for (size_t m = 0; m < report.per_group_peaks.size(); ++m) {
    if (report.per_group_peaks[m] > report.max_peak) {
      report.max_peak = report.per_group_peaks[m];
      report.argmax_group = static_cast<int>(m);
    }
  }
  return report;
}

}  // namespace

PeakReport analytic_peaks(const ArchitectureSpec& arch, const GroupingPlan& plan, int B) {
  arch.validate();
  plan.validate(arch.num_layers());
  if (B <= 0) throw ParameterError("analytic_peaks: batch size must be positive");
  if (!plan.contiguous())
    throw PlanError("analytic_peaks: plan has non-contiguous groups, peaks are defined for "
                    "contiguous plans only");
  LayerSums sums(arch);
  return report_from_sums(sums, plan, B);
}

std::vector<RankedPlan> plan_search(const ArchitectureSpec& arch, int B, SearchMode mode) {
  arch.validate();
  if (B <= 0) throw ParameterError("plan_search: batch size must be positive");
  int L = arch.num_layers();
  LayerSums sums(arch);
  std::vector<RankedPlan> out;

  auto add_plan = [&](const std::vector<int>& bounds) {
    GroupingPlan plan = plan_from_boundaries(arch, bounds);
    out.push_back({plan, report_from_sums(sums, plan, B)});
  };

  switch (mode) {
    case SearchMode::TwoGroupSweep: {
      for (int b = 1; b < L; ++b) add_plan({b});
      break;
    }
    case SearchMode::Exhaustive: {
      if (L > 12)
        throw SizeError("plan_search: exhaustive mode supports at most 12 layers, got " +
                        std::to_string(L));
      uint32_t count = 1u << (L - 1);
      out.resize(count);
#pragma omp parallel for schedule(static)
      for (int64_t mask = 0; mask < static_cast<int64_t>(count); ++mask) {
        std::vector<int> bounds;
        for (int i = 1; i < L; ++i)
          if (mask & (1u << (i - 1))) bounds.push_back(i);
        GroupingPlan plan = plan_from_boundaries(arch, bounds);
        out[static_cast<size_t>(mask)] = {plan, report_from_sums(sums, plan, B)};
      }
      break;
    }
    case SearchMode::BalancedGreedy: {
      add_plan({});  // single group as the starting budget
      double budget = out.back().report.max_peak;
      while (true) {
        std::vector<int> bounds;
        int hi = L - 1;
        for (int l = L - 1; l > 0; --l) {
          // Close the current group before layer l-1 if extending down would
          // reach the budget; a group always keeps at least one layer.
          if (static_cast<double>(sums.group_peak(l - 1, hi, B)) >= budget) {
            bounds.push_back(l);
            hi = l - 1;
          }
        }
        std::sort(bounds.begin(), bounds.end());
        GroupingPlan plan = plan_from_boundaries(arch, bounds);
        PeakReport report = report_from_sums(sums, plan, B);
        if (report.max_peak < budget) {
          out.push_back({plan, report});
          budget = report.max_peak;
        } else {
          break;
        }
      }
      break;
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const RankedPlan& a, const RankedPlan& b) {
    if (a.report.max_peak != b.report.max_peak) return a.report.max_peak < b.report.max_peak;
    return plan_boundaries(a.plan) < plan_boundaries(b.plan);
  });
  return out;
}

}  // namespace dpopt
