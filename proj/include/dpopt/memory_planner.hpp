// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Closed-form per-group memory peaks for contiguous grouping plans, and
// search over plans minimizing the maximum peak.

#pragma once

#include <vector>

#include "dpopt/grouping.hpp"

namespace dpopt {

// Peaks are float counts; the CLI multiplies by eight for bytes.
struct PeakReport {
  std::vector<double> per_group_peaks;
  double max_peak = 0.0;
  int argmax_group = 0;
};

// For a contiguous group [lo, hi] the peak is reached the moment the backward
// pass has produced the group's lowest output gradient: live tensors are the
// input activations of layers 0..hi and the output gradients of layers
// lo..hi, giving B * (sum_{l<=hi} T_l d_l + sum_{lo<=r<=hi} T_r p_r). This
// matches the scheduled ledger exactly, entry for entry.
PeakReport analytic_peaks(const ArchitectureSpec& arch, const GroupingPlan& plan, int B);

enum class SearchMode { TwoGroupSweep, BalancedGreedy, Exhaustive };

struct RankedPlan {
  GroupingPlan plan;
  PeakReport report;
};

// Results sorted by (max_peak, lexicographic boundaries), best first.
// TwoGroupSweep enumerates every two-group boundary. BalancedGreedy grows
// groups from the top layer down, closing a group when its running peak would
// pass the best maximum found so far, and repeats while that improves.
// Exhaustive enumerates all 2^(L-1) contiguous partitions and refuses more
// than 12 layers.
std::vector<RankedPlan> plan_search(const ArchitectureSpec& arch, int B, SearchMode mode);

}  // namespace dpopt
