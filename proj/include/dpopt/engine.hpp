// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-sample gradient engine for stacks of linear layers: forward with
// activation caching, layer-by-layer backward, ghost norms and clipped-sum
// weight gradients.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpopt/tensor.hpp"

namespace dpopt {

enum class Activation { Identity, Relu, Tanh };
enum class Loss { MeanSquaredError, SoftmaxCrossEntropy, PerSampleSum };

std::string to_string(Activation a);
std::string to_string(Loss l);
Activation activation_from_string(const std::string& s);
Loss loss_from_string(const std::string& s);

// One linear layer y = x W with an elementwise activation applied to y.
// Shapes: input [B,T,d], weight [d,p], output [B,T,p].
struct LayerSpec {
  int index = 0;
  int T = 1;
  int d = 1;
  int p = 1;
  Activation act = Activation::Identity;
};

struct ArchitectureSpec {
  std::vector<LayerSpec> layers;
  Loss loss = Loss::MeanSquaredError;

  int num_layers() const { return static_cast<int>(layers.size()); }
  int64_t param_count() const;
  // Composition: p of layer l equals d of layer l+1; T constant across layers.
  void validate() const;

  static ArchitectureSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct Model {
  ArchitectureSpec arch;
  std::vector<Tensor> weights;  // weights[l] has shape [d_l, p_l]

  // Entries drawn N(0, 1/sqrt(d_l)), layer by layer in ascending order.
  static Model init(const ArchitectureSpec& arch, RngState& rng);
};

// Holds everything the backward pass consumes. activations[l] is the input to
// layer l; preacts[l] is x W before the activation; output is the final
// post-activation network output the loss reads.
struct ForwardCache {
  int B = 0;
  int T = 0;
  std::vector<Tensor> activations;
  std::vector<Tensor> preacts;
  Tensor output;
  Tensor per_sample_loss;  // [B]
  Tensor targets;
  int next_backward = -1;  // enforced descending cursor for backward_layer

  double total_loss() const;
  void drop_activation(int l) {
    activations[static_cast<size_t>(l)] = Tensor();
  }
};

// Per-example squared gradient norms, entry (i, l) = |dL_i/dW_l|^2.
struct PerSampleNorms {
  int B = 0;
  int L = 0;
  std::vector<double> norms_sq;  // row-major [B x L]

  PerSampleNorms() = default;
  PerSampleNorms(int b, int l) : B(b), L(l), norms_sq(static_cast<size_t>(b) * l, 0.0) {}
  double& at(int i, int l) { return norms_sq[static_cast<size_t>(i) * L + l]; }
  double at(int i, int l) const { return norms_sq[static_cast<size_t>(i) * L + l]; }
};

// Runs the forward pass and caches per-layer inputs plus per-sample losses.
// The batch loss is the plain sum of per-sample losses, so output gradients
// decompose sample by sample. batch is [B,T,d_1]; targets depend on the loss:
// mean-squared-error [B,T,p_L], softmax-cross-entropy integer labels [B,T],
// per-sample-sum ignored (pass an empty tensor).
ForwardCache forward(const Model& model, const Tensor& batch, const Tensor& targets);

// Gradient of the summed loss w.r.t. the network output, shape [B,T,p_L].
Tensor loss_output_gradient(const ForwardCache& cache, Loss loss);

// Output gradient dL/ds_l = upstream ⊙ act'(s_l), where upstream = dL/da_{l+1}.
// For the top layer pass loss_output_gradient. Layers must be visited in
// strictly descending order.
Tensor backward_layer(const Model& model, ForwardCache& cache, int l, const Tensor& upstream);

// dL/da_l = out_grad_l W_l^T, the upstream tensor for layer l-1.
Tensor input_gradient(const Model& model, int l, const Tensor& out_grad_l);

// Per-sample squared Frobenius norms |a_i^T G_i|^2 without materializing the
// d x p per-sample gradients. T = 1 uses |a_i|^2 |G_i|^2; T > 1 contracts the
// two T x T Gram matrices.
Tensor ghost_norm(const Tensor& a_l, const Tensor& out_grad_l);

// Sum_i C_i a_i^T G_i as one matmul over the batch after scaling each
// sample's output gradient rows by C_i. Result shape [d, p].
Tensor clipped_weight_grad(const Tensor& a_l, const Tensor& out_grad_l, const Tensor& clip_factors);

}  // namespace dpopt
