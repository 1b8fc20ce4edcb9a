// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent serial implementations used as test oracles and by the kernel
// benchmark. Everything here is deliberately naive and shares no code with
// the main execution paths it is compared against.

#pragma once

#include <vector>

#include "dpopt/engine.hpp"
#include "dpopt/tensor.hpp"

namespace dpopt::reference {

Tensor matmul_naive(const Tensor& a, const Tensor& b);
Tensor matmul_nt_naive(const Tensor& a, const Tensor& b);
Tensor matmul_tn_naive(const Tensor& a, const Tensor& b);
double frobenius_loop(const Tensor& t);

// Straight re-evaluation of the forward pass, loop by loop.
std::vector<double> forward_losses(const Model& model, const Tensor& batch, const Tensor& targets);
double total_loss(const Model& model, const Tensor& batch, const Tensor& targets);

// Materialized per-sample weight gradients: result[i][l] has shape [d_l, p_l].
std::vector<std::vector<Tensor>> per_sample_grads(const Model& model, const Tensor& batch,
                                                  const Tensor& targets);

// Central finite difference of the total loss w.r.t. every entry of W_l.
Tensor fd_weight_grad(const Model& model, const Tensor& batch, const Tensor& targets, int l,
                      double step = 1e-5);

// Materialize-everything private gradient: per-sample gradients from the
// loops above, group norms, clip factors inlined from their definitions,
// plain summation, then one noise tensor per layer in ascending order.
// Group layout and noise contract match the scheduled path so results are
// comparable bit for bit given the same RngState.
struct NaivePrivateGradient {
  std::vector<Tensor> layer_grads;
};
NaivePrivateGradient naive_private_gradient(const Model& model, const Tensor& batch,
                                            const Tensor& targets,
                                            const std::vector<std::vector<int>>& groups,
                                            bool abadi, double gamma,
                                            const std::vector<double>& thresholds, double sigma_dp,
                                            RngState& rng);

// All contiguous partitions of {0..n-1} in deterministic order.
std::vector<std::vector<std::vector<int>>> contiguous_partitions(int n);

}  // namespace dpopt::reference
