// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "dpopt/memory_planner.hpp"
#include "dpopt/reference.hpp"
#include "dpopt/verify.hpp"

using namespace dpopt;

namespace {

ArchitectureSpec chain(const std::vector<int>& d, const std::vector<int>& p, int T = 1) {
  ArchitectureSpec arch;
  arch.loss = Loss::PerSampleSum;
  for (size_t l = 0; l < d.size(); ++l)
    arch.layers.push_back({static_cast<int>(l), T, d[l], p[l], Activation::Identity});
  arch.validate();
  return arch;
}

}  // namespace

TEST_CASE("closed-form peaks by hand") {
  // Single layer, T = 1, d = 2, p = 3: live floats at the peak are
  // B * (d + p) = 4 * 5 = 20.
  ArchitectureSpec one = chain({2}, {3});
  GroupingPlan all = build_grouping(one, GroupingStyle::AllLayer);
  PeakReport rep = analytic_peaks(one, all, 4);
  CHECK(rep.max_peak == 20.0);
  CHECK(rep.per_group_peaks == std::vector<double>{20.0});

  // Two layers d = (2, 3), p = (3, 1), B = 1. All-layer peak holds both
  // activations and both output gradients: 2 + 3 + 3 + 1 = 9. Layer-wise:
  // group {1} peaks at 2 + 3 + 1 = 6, then group {0} at 2 + 3 = 5.
  ArchitectureSpec two = chain({2, 3}, {3, 1});
  CHECK(analytic_peaks(two, build_grouping(two, GroupingStyle::AllLayer), 1).max_peak == 9.0);
  PeakReport lw = analytic_peaks(two, build_grouping(two, GroupingStyle::LayerWise), 1);
  CHECK(lw.per_group_peaks == std::vector<double>{5.0, 6.0});
  CHECK(lw.max_peak == 6.0);
  CHECK(lw.argmax_group == 1);

  // Sequence length multiplies every entry.
  ArchitectureSpec seq = chain({2}, {3}, 4);
  CHECK(analytic_peaks(seq, build_grouping(seq, GroupingStyle::AllLayer), 4).max_peak == 80.0);
}

TEST_CASE("rejects what it cannot price") {
  ArchitectureSpec arch = chain({2, 3, 2}, {3, 2, 2});
  GroupingPlan plan = build_grouping(arch, GroupingStyle::AllLayer);
  CHECK_THROWS_AS(analytic_peaks(arch, plan, 0), ParameterError);

  GroupingPlan nc = plan;
  nc.M = 2;
  nc.groups = {{0, 2}, {1}};
  nc.R = default_thresholds(2);
  CHECK_THROWS_AS(analytic_peaks(arch, nc, 1), PlanError);
}

TEST_CASE("ledger and closed form agree on random plans") {
  SuiteResult r = verify_ledger_agreement(10, 7, 6);
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("uniform group count trend on a homogeneous stack") {
  SuiteResult r = verify_peak_trend();
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("two-group sweep: hand sequence and interior minimum") {
  ArchitectureSpec arch = chain({4, 20, 10, 6, 4, 2}, {20, 10, 6, 4, 2, 2});
  std::vector<double> expect = {70, 60, 70, 80, 86};
  for (int b = 1; b <= 5; ++b) {
    GroupingParams params;
    params.boundaries = {b};
    PeakReport rep =
        analytic_peaks(arch, build_grouping(arch, GroupingStyle::NonUniform, params), 1);
    CHECK(rep.max_peak == expect[static_cast<size_t>(b - 1)]);
  }
  CHECK(analytic_peaks(arch, build_grouping(arch, GroupingStyle::AllLayer), 1).max_peak == 90.0);

  std::vector<RankedPlan> ranked = plan_search(arch, 1, SearchMode::TwoGroupSweep);
  REQUIRE(ranked.size() == 5);
  CHECK(ranked.front().report.max_peak == 60.0);
  CHECK(ranked.front().plan.groups[1].front() == 2);

  SuiteResult r = verify_two_group_sweep();
  INFO(r.detail);
  CHECK(r.pass);
}

TEST_CASE("exhaustive search matches an independent enumeration") {
  ArchitectureSpec arch = chain({3, 7, 2, 5}, {7, 2, 5, 1});
  int B = 2;
  std::vector<RankedPlan> ranked = plan_search(arch, B, SearchMode::Exhaustive);
  CHECK(ranked.size() == 8);  // 2^(L-1)
  for (size_t i = 0; i + 1 < ranked.size(); ++i)
    CHECK(ranked[i].report.max_peak <= ranked[i + 1].report.max_peak);

  double best = 1e300;
  for (const auto& groups : reference::contiguous_partitions(4)) {
    GroupingPlan plan;
    plan.M = static_cast<int>(groups.size());
    plan.groups = groups;
    plan.style = GroupingStyle::NonUniform;
    plan.R = default_thresholds(plan.M);
    best = std::min(best, analytic_peaks(arch, plan, B).max_peak);
  }
  CHECK(ranked.front().report.max_peak == best);

  ArchitectureSpec big = chain(std::vector<int>(13, 2), std::vector<int>(13, 2));
  CHECK_THROWS_AS(plan_search(big, 1, SearchMode::Exhaustive), SizeError);
}

TEST_CASE("balanced greedy lands between all-layer and the optimum") {
  ArchitectureSpec arch = chain({6, 12, 9, 3, 8, 2, 4}, {12, 9, 3, 8, 2, 4, 1});
  int B = 3;
  double all = analytic_peaks(arch, build_grouping(arch, GroupingStyle::AllLayer), B).max_peak;
  double opt = plan_search(arch, B, SearchMode::Exhaustive).front().report.max_peak;
  std::vector<RankedPlan> greedy = plan_search(arch, B, SearchMode::BalancedGreedy);
  REQUIRE(!greedy.empty());
  double got = greedy.front().report.max_peak;
  CHECK(got <= all);
  CHECK(got >= opt);
  greedy.front().plan.validate(arch.num_layers());
  CHECK(greedy.front().plan.contiguous());
}
