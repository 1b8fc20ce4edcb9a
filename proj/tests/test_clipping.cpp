// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dpopt/grouping.hpp"
#include "dpopt/reference.hpp"

using namespace dpopt;

namespace {

ArchitectureSpec five_layers() {
  ArchitectureSpec arch;
  arch.loss = Loss::PerSampleSum;
  for (int l = 0; l < 5; ++l) arch.layers.push_back({l, 1, 3, 3, Activation::Identity});
  arch.validate();
  return arch;
}

}  // namespace

TEST_CASE("grouping styles") {
  ArchitectureSpec arch = five_layers();

  GroupingPlan all = build_grouping(arch, GroupingStyle::AllLayer);
  CHECK(all.M == 1);
  CHECK(all.groups == std::vector<std::vector<int>>{{0, 1, 2, 3, 4}});

  GroupingParams p3;
  p3.k = 3;
  GroupingPlan uni = build_grouping(arch, GroupingStyle::Uniform, p3);
  // Remainder goes to the earliest groups: sizes 2, 2, 1.
  CHECK(uni.groups == std::vector<std::vector<int>>{{0, 1}, {2, 3}, {4}});

  GroupingPlan lw = build_grouping(arch, GroupingStyle::LayerWise);
  CHECK(lw.M == 5);
  for (int l = 0; l < 5; ++l) CHECK(lw.groups[static_cast<size_t>(l)] == std::vector<int>{l});

  GroupingPlan pw = build_grouping(arch, GroupingStyle::ParamWise);
  CHECK(pw.M == 5);  // one weight tensor per layer

  GroupingParams pb;
  pb.boundaries = {2, 4};
  GroupingPlan nu = build_grouping(arch, GroupingStyle::NonUniform, pb);
  CHECK(nu.groups == std::vector<std::vector<int>>{{0, 1}, {2, 3}, {4}});

  GroupingParams bad;
  bad.boundaries = {0, 2};
  CHECK_THROWS_AS(build_grouping(arch, GroupingStyle::NonUniform, bad), PlanError);
  GroupingParams bad2;
  bad2.k = 6;
  CHECK_THROWS_AS(build_grouping(arch, GroupingStyle::Uniform, bad2), PlanError);
}

TEST_CASE("plan validation and threshold norm") {
  ArchitectureSpec arch = five_layers();
  GroupingPlan plan = build_grouping(arch, GroupingStyle::Uniform, {.k = 2, .boundaries = {}});
  CHECK(plan.contiguous());
  CHECK(plan.threshold_norm() == doctest::Approx(1.0).epsilon(1e-12));

  GroupingPlan broken = plan;
  broken.groups[0] = {0, 1};  // layer 2 lost
  broken.groups[1] = {3, 4};
  CHECK_THROWS_AS(broken.validate(5), PlanError);

  GroupingPlan nc = plan;
  nc.groups[0] = {0, 4};
  nc.groups[1] = {1, 2, 3};
  CHECK(nc.contiguous() == false);
  CHECK_NOTHROW(nc.validate(5));  // non-contiguous is legal, just not closed-form profilable

  ThresholdVector R = default_thresholds(4);
  double nn = 0.0;
  for (double r : R) nn += r * r;
  CHECK(std::sqrt(nn) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("clip factors") {
  ClipConfig cfg;  // auto, gamma 0.01
  CHECK(auto_clip_factor(0.99, cfg) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(auto_clip_factor(0.0, cfg) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK_THROWS_AS(auto_clip_factor(-1.0, cfg), ParameterError);

  CHECK(abadi_clip_factor(2.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(abadi_clip_factor(0.5, 1.0) == 1.0);
  CHECK(abadi_clip_factor(0.0, 1.0) == 1.0);  // zero gradient left alone
}

TEST_CASE("factors and assembly weights from hand norms") {
  ArchitectureSpec arch = five_layers();
  GroupingPlan plan = build_grouping(arch, GroupingStyle::Uniform, {.k = 2, .boundaries = {}});
  // Groups {0,1,2} and {3,4}.
  PerSampleNorms norms(2, 5);
  for (int l = 0; l < 5; ++l) {
    norms.at(0, l) = 1.0;  // sample 0: group norms sqrt(3), sqrt(2)
    norms.at(1, l) = 4.0;  // sample 1: group norms sqrt(12), sqrt(8)
  }

  ClipConfig auto_cfg;
  ClipFactors f = compute_clip_factors(norms, plan, auto_cfg);
  CHECK(f.at(0, 0) == doctest::Approx(1.0 / (std::sqrt(3.0) + 0.01)).epsilon(1e-12));
  CHECK(f.at(1, 1) == doctest::Approx(1.0 / (std::sqrt(8.0) + 0.01)).epsilon(1e-12));

  // Auto assembly folds in the 1/sqrt(M) scale.
  double w = assembly_weight(f, plan, auto_cfg, 0, 0);
  CHECK(w == doctest::Approx(1.0 / (std::sqrt(2.0) * (std::sqrt(3.0) + 0.01))).epsilon(1e-12));

  Tensor wv = group_assembly_weights(norms, plan, auto_cfg, 1);
  CHECK(wv.size() == 2);
  CHECK(wv.data[1] == doctest::Approx(1.0 / (std::sqrt(2.0) * (std::sqrt(8.0) + 0.01))).epsilon(1e-12));

  ClipConfig ab;
  ab.function = ClipFunction::Abadi;
  GroupingPlan plan_r = plan;
  plan_r.R = {2.0, 2.0};
  ClipFactors fa = compute_clip_factors(norms, plan_r, ab);
  CHECK(fa.at(0, 0) == 1.0);  // sqrt(3) < 2
  CHECK(fa.at(1, 0) == doctest::Approx(2.0 / std::sqrt(12.0)).epsilon(1e-12));
  CHECK(assembly_weight(fa, plan_r, ab, 1, 0) == doctest::Approx(2.0 / std::sqrt(12.0)).epsilon(1e-12));
}

TEST_CASE("noise contract") {
  PrivateGradient base;
  base.layer_grads.push_back(Tensor({2, 2}, {1, 2, 3, 4}));
  base.layer_grads.push_back(Tensor({1, 3}, {5, 6, 7}));
  base.sensitivity_norm = 2.0;

  PrivateGradient silent = base;
  RngState r0(5);
  add_noise(silent, 0.0, r0);
  CHECK(silent.layer_grads[0].data == base.layer_grads[0].data);
  CHECK(r0.counter == 2 * (4 + 3));  // stream consumed even at sigma zero

  PrivateGradient noisy = base;
  RngState r1(5), replay(5);
  add_noise(noisy, 0.5, r1);
  CHECK(r1.counter == r0.counter);
  Tensor n0 = gaussian(replay, {2, 2}, 1.0);
  Tensor n1 = gaussian(replay, {1, 3}, 1.0);
  for (size_t k = 0; k < 4; ++k)
    CHECK(noisy.layer_grads[0].data[k] ==
          doctest::Approx(base.layer_grads[0].data[k] + 0.5 * 2.0 * n0.data[k]).epsilon(1e-12));
  for (size_t k = 0; k < 3; ++k)
    CHECK(noisy.layer_grads[1].data[k] ==
          doctest::Approx(base.layer_grads[1].data[k] + 0.5 * 2.0 * n1.data[k]).epsilon(1e-12));
}

TEST_CASE("single-layer private gradient by hand") {
  // One 1x1 layer, per-sample-sum loss: per-sample gradient equals the input.
  ArchitectureSpec arch;
  arch.loss = Loss::PerSampleSum;
  arch.layers.push_back({0, 1, 1, 1, Activation::Identity});
  Model model;
  model.arch = arch;
  model.weights.push_back(Tensor({1, 1}, {1.0}));

  Tensor batch({2, 1, 1}, {3.0, 4.0});
  ForwardCache cache = forward(model, batch, Tensor());
  Tensor upstream = loss_output_gradient(cache, arch.loss);
  Tensor g = backward_layer(model, cache, 0, upstream);
  Tensor gn = ghost_norm(cache.activations[0], g);
  PerSampleNorms norms(2, 1);
  norms.at(0, 0) = gn.data[0];
  norms.at(1, 0) = gn.data[1];
  CHECK(gn.data[0] == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(gn.data[1] == doctest::Approx(16.0).epsilon(1e-12));

  GroupingPlan plan = build_grouping(arch, GroupingStyle::AllLayer);
  ClipConfig cfg;  // auto
  std::vector<Tensor> acts = {cache.activations[0]};
  std::vector<Tensor> grads = {g};
  RngState rng(1);
  PrivateGradient pg = group_private_gradient(norms, acts, grads, plan, cfg, 0.0, rng);
  // M = 1: sum of g_i / (|g_i| + gamma) = 3/3.01 + 4/4.01.
  CHECK(pg.layer_grads[0].data[0] ==
        doctest::Approx(3.0 / 3.01 + 4.0 / 4.01).epsilon(1e-12));
  CHECK(pg.sensitivity_norm == 1.0);
}

TEST_CASE("string conversions") {
  CHECK(to_string(ClipFunction::Auto) == "auto");
  CHECK(clip_function_from_string("abadi") == ClipFunction::Abadi);
  CHECK(grouping_style_from_string("layer-wise") == GroupingStyle::LayerWise);
  CHECK(to_string(GroupingStyle::NonUniform) == "non-uniform");
  CHECK_THROWS_AS(clip_function_from_string("soft"), ConfigError);
  CHECK_THROWS_AS(grouping_style_from_string("fancy"), ConfigError);
}

TEST_CASE("plan json round trip") {
  ArchitectureSpec arch = five_layers();
  GroupingPlan plan = build_grouping(arch, GroupingStyle::Uniform, {.k = 2, .boundaries = {}});
  GroupingPlan back = GroupingPlan::from_json(plan.to_json());
  CHECK(back.M == plan.M);
  CHECK(back.groups == plan.groups);
  CHECK(back.R == plan.R);
  CHECK(back.style == plan.style);
}
