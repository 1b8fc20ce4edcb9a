// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dpopt/reference.hpp"
#include "dpopt/verify.hpp"

using namespace dpopt;

namespace {

struct Instance {
  Model model;
  Tensor batch;
  Tensor targets;
};

Instance make_instance(uint64_t seed, Loss loss, int B, int T, std::vector<int> dims) {
  ArchitectureSpec arch;
  arch.loss = loss;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    Activation act = l + 2 == dims.size() ? Activation::Identity
                                          : (l % 2 ? Activation::Relu : Activation::Tanh);
    arch.layers.push_back({static_cast<int>(l), T, dims[l], dims[l + 1], act});
  }
  arch.validate();
  RngState rng(seed);
  Model model = Model::init(arch, rng);
  Tensor batch = gaussian(rng, {B, T, dims[0]}, 1.0);
  Tensor targets;
  if (loss == Loss::MeanSquaredError) targets = gaussian(rng, {B, T, dims.back()}, 1.0);
  if (loss == Loss::SoftmaxCrossEntropy) {
    targets = Tensor({B, T});
    for (auto& v : targets.data) v = static_cast<double>(rng.next_u64() % dims.back());
  }
  return {std::move(model), std::move(batch), std::move(targets)};
}

// Full backward through the engine, returning summed weight gradients.
std::vector<Tensor> engine_grads(const Model& model, const Tensor& batch, const Tensor& targets) {
  ForwardCache cache = forward(model, batch, targets);
  int L = model.arch.num_layers(), B = cache.B;
  Tensor ones({B});
  for (auto& v : ones.data) v = 1.0;
  std::vector<Tensor> grads(static_cast<size_t>(L));
  Tensor upstream = loss_output_gradient(cache, model.arch.loss);
  for (int l = L - 1; l >= 0; --l) {
    Tensor g = backward_layer(model, cache, l, upstream);
    if (l > 0) upstream = input_gradient(model, l, g);
    grads[static_cast<size_t>(l)] =
        clipped_weight_grad(cache.activations[static_cast<size_t>(l)], g, ones);
  }
  return grads;
}

}  // namespace

TEST_CASE("forward losses match the loop reference") {
  for (Loss loss : {Loss::MeanSquaredError, Loss::SoftmaxCrossEntropy, Loss::PerSampleSum}) {
    Instance inst = make_instance(31, loss, 5, 2, {4, 3, 2});
    ForwardCache cache = forward(inst.model, inst.batch, inst.targets);
    std::vector<double> ref = reference::forward_losses(inst.model, inst.batch, inst.targets);
    REQUIRE(cache.per_sample_loss.size() == static_cast<int64_t>(ref.size()));
    for (size_t i = 0; i < ref.size(); ++i)
      CHECK(cache.per_sample_loss.data[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    CHECK(cache.total_loss() ==
          doctest::Approx(reference::total_loss(inst.model, inst.batch, inst.targets))
              .epsilon(1e-12));
  }
}

TEST_CASE("summed backward gradients match finite differences") {
  Instance inst = make_instance(5, Loss::MeanSquaredError, 3, 2, {3, 4, 2});
  std::vector<Tensor> grads = engine_grads(inst.model, inst.batch, inst.targets);
  for (int l = 0; l < inst.model.arch.num_layers(); ++l) {
    Tensor fd = reference::fd_weight_grad(inst.model, inst.batch, inst.targets, l);
    for (size_t k = 0; k < fd.data.size(); ++k)
      CHECK(grads[static_cast<size_t>(l)].data[k] == doctest::Approx(fd.data[k]).epsilon(5e-5));
  }
}

TEST_CASE("per-sample gradients sum to the batch gradient") {
  Instance inst = make_instance(13, Loss::SoftmaxCrossEntropy, 4, 3, {3, 3, 3});
  auto per_sample = reference::per_sample_grads(inst.model, inst.batch, inst.targets);
  std::vector<Tensor> grads = engine_grads(inst.model, inst.batch, inst.targets);
  for (int l = 0; l < inst.model.arch.num_layers(); ++l) {
    Tensor sum(grads[static_cast<size_t>(l)].shape);
    for (const auto& sample : per_sample)
      for (size_t k = 0; k < sum.data.size(); ++k)
        sum.data[k] += sample[static_cast<size_t>(l)].data[k];
    for (size_t k = 0; k < sum.data.size(); ++k)
      CHECK(grads[static_cast<size_t>(l)].data[k] == doctest::Approx(sum.data[k]).epsilon(1e-10));
  }
}

TEST_CASE("ghost norms and clipped sums agree with materialized gradients") {
  SuiteResult ghost = verify_ghost_norm(25, 99);
  INFO(ghost.detail);
  CHECK(ghost.pass);
  SuiteResult clipped = verify_clipped_sum(25, 99);
  INFO(clipped.detail);
  CHECK(clipped.pass);
}

TEST_CASE("backward enforces descending layer order") {
  Instance inst = make_instance(8, Loss::PerSampleSum, 2, 1, {3, 3, 2});
  ForwardCache cache = forward(inst.model, inst.batch, inst.targets);
  Tensor upstream = loss_output_gradient(cache, inst.model.arch.loss);
  CHECK_THROWS_AS(backward_layer(inst.model, cache, 0, upstream), SchedulingError);
  Tensor g1 = backward_layer(inst.model, cache, 1, upstream);
  CHECK_THROWS_AS(backward_layer(inst.model, cache, 1, upstream), SchedulingError);
}

TEST_CASE("per-sample-sum output gradient is all ones") {
  Instance inst = make_instance(17, Loss::PerSampleSum, 2, 2, {3, 2});
  ForwardCache cache = forward(inst.model, inst.batch, inst.targets);
  Tensor g = loss_output_gradient(cache, Loss::PerSampleSum);
  for (double v : g.data) CHECK(v == 1.0);
}

TEST_CASE("architecture validation") {
  ArchitectureSpec arch;
  arch.layers.push_back({0, 1, 3, 4, Activation::Identity});
  arch.layers.push_back({1, 1, 5, 2, Activation::Identity});  // 4 != 5
  CHECK_THROWS_AS(arch.validate(), ConfigError);

  ArchitectureSpec empty;
  CHECK_THROWS_AS(empty.validate(), ConfigError);

  Instance inst = make_instance(3, Loss::SoftmaxCrossEntropy, 2, 1, {3, 3});
  Tensor bad = inst.targets;
  bad.data[0] = 7.0;  // label out of range
  CHECK_THROWS_AS(forward(inst.model, inst.batch, bad), DomainError);
}

TEST_CASE("model init is deterministic in the seed") {
  ArchitectureSpec arch;
  arch.layers.push_back({0, 1, 4, 3, Activation::Tanh});
  arch.layers.push_back({1, 1, 3, 2, Activation::Identity});
  arch.loss = Loss::PerSampleSum;
  RngState a(77), b(77), c(78);
  Model m1 = Model::init(arch, a);
  Model m2 = Model::init(arch, b);
  Model m3 = Model::init(arch, c);
  CHECK(m1.weights[0].data == m2.weights[0].data);
  CHECK(m1.weights[0].data != m3.weights[0].data);
}

TEST_CASE("string round trips") {
  for (Activation a : {Activation::Identity, Activation::Relu, Activation::Tanh})
    CHECK(activation_from_string(to_string(a)) == a);
  for (Loss l : {Loss::MeanSquaredError, Loss::SoftmaxCrossEntropy, Loss::PerSampleSum})
    CHECK(loss_from_string(to_string(l)) == l);
  CHECK_THROWS_AS(activation_from_string("swish"), ConfigError);
}
