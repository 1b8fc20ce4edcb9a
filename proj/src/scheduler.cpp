// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#include "dpopt/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace dpopt {

void MemoryLedger::alloc(const std::string& id, int64_t bytes) {
  if (!live.emplace(id, bytes).second) throw Error("ledger: duplicate allocation of " + id);
  live_bytes += bytes;
  events.push_back({"+" + id, live_bytes});
}

void MemoryLedger::release(const std::string& id) {
  auto it = live.find(id);
  if (it == live.end()) throw Error("ledger: release of unknown tensor " + id);
  live_bytes -= it->second;
  live.erase(it);
  events.push_back({"-" + id, live_bytes});
}

int64_t MemoryLedger::max_live() const {
  int64_t mx = 0;
  for (const auto& e : events) mx = std::max(mx, e.live_bytes);
  return mx;
}

Optimizer optimizer_from_string(const std::string& s) {
  if (s == "sgd") return Optimizer::Sgd;
  if (s == "adamw") return Optimizer::AdamW;
  throw ConfigError("unknown optimizer '" + s + "'");
}

std::string to_string(Optimizer o) { return o == Optimizer::Sgd ? "sgd" : "adamw"; }

namespace {

constexpr int64_t kBytesPerEntry = 8;

int64_t activation_bytes(const LayerSpec& l, int B) {
  return kBytesPerEntry * B * static_cast<int64_t>(l.T) * l.d;
}

int64_t out_grad_bytes(const LayerSpec& l, int B) {
  return kBytesPerEntry * B * static_cast<int64_t>(l.T) * l.p;
}

// Everything dp_step does except the noise draw, so gradient accumulation
// across micro-batches can add noise once at the end.
StepResult scheduled_clipped_sums(const Model& model, const Tensor& batch, const Tensor& targets,
                                  const GroupingPlan& plan, const ClipConfig& cfg,
                                  bool keep_ledger_events) {
  const ArchitectureSpec& arch = model.arch;
  int L = arch.num_layers();
  plan.validate(L);
  cfg.validate();
  int B = batch.dim(0);

  StepResult result;
  result.private_grad.layer_grads.resize(static_cast<size_t>(L));
  result.private_grad.sensitivity_norm =
      cfg.function == ClipFunction::Auto ? 1.0 : plan.threshold_norm();
  result.per_group_peaks.assign(static_cast<size_t>(plan.M), 0);

  std::vector<int> group_of(static_cast<size_t>(L), -1);
  std::vector<int> completes_at(static_cast<size_t>(plan.M), 0);
  for (int m = 0; m < plan.M; ++m) {
    int lo = *std::min_element(plan.groups[static_cast<size_t>(m)].begin(),
                               plan.groups[static_cast<size_t>(m)].end());
    completes_at[static_cast<size_t>(m)] = lo;
    for (int l : plan.groups[static_cast<size_t>(m)]) group_of[static_cast<size_t>(l)] = m;
  }

  ForwardCache cache = forward(model, batch, targets);
  result.loss = cache.total_loss();

  MemoryLedger& ledger = result.ledger;
  for (int l = 0; l < L; ++l)
    ledger.alloc("a" + std::to_string(l), activation_bytes(arch.layers[static_cast<size_t>(l)], B));

  PerSampleNorms norms(B, L);
  std::vector<Tensor> out_grads(static_cast<size_t>(L));
  Tensor upstream = loss_output_gradient(cache, arch.loss);

  for (int l = L - 1; l >= 0; --l) {
    Tensor g = backward_layer(model, cache, l, upstream);
    ledger.alloc("g" + std::to_string(l), out_grad_bytes(arch.layers[static_cast<size_t>(l)], B));
    Tensor gn = ghost_norm(cache.activations[static_cast<size_t>(l)], g);
    for (int i = 0; i < B; ++i) norms.at(i, l) = gn.data[static_cast<size_t>(i)];
    if (l > 0) upstream = input_gradient(model, l, g);
    out_grads[static_cast<size_t>(l)] = std::move(g);

    int m = group_of[static_cast<size_t>(l)];
    if (completes_at[static_cast<size_t>(m)] == l) {
      result.per_group_peaks[static_cast<size_t>(m)] = ledger.live_bytes;
      Tensor weights = group_assembly_weights(norms, plan, cfg, m);
      for (int r : plan.groups[static_cast<size_t>(m)])
        result.private_grad.layer_grads[static_cast<size_t>(r)] = clipped_weight_grad(
            cache.activations[static_cast<size_t>(r)], out_grads[static_cast<size_t>(r)], weights);
      for (int r : plan.groups[static_cast<size_t>(m)]) {
        ledger.release("g" + std::to_string(r));
        ledger.release("a" + std::to_string(r));
        out_grads[static_cast<size_t>(r)] = Tensor();
        cache.drop_activation(r);
      }
    }
  }
  if (!ledger.empty()) throw Error("ledger: tensors left live after backward pass");
  result.max_peak = *std::max_element(result.per_group_peaks.begin(), result.per_group_peaks.end());
  if (!keep_ledger_events) result.ledger.events.clear();
  return result;
}

void accumulate(PrivateGradient& acc, const PrivateGradient& part) {
  if (acc.layer_grads.empty()) {
    acc.layer_grads = part.layer_grads;
    return;
  }
  for (size_t l = 0; l < acc.layer_grads.size(); ++l)
    for (size_t k = 0; k < acc.layer_grads[l].data.size(); ++k)
      acc.layer_grads[l].data[k] += part.layer_grads[l].data[k];
}

bool all_finite(const Tensor& t) {
  for (double v : t.data)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

StepResult dp_step(const Model& model, const Tensor& batch, const Tensor& targets,
                   const GroupingPlan& plan, const ClipConfig& cfg, double sigma_dp, RngState& rng,
                   bool keep_ledger_events) {
  if (sigma_dp < 0.0) throw ParameterError("dp_step: negative sigma");
  StepResult result = scheduled_clipped_sums(model, batch, targets, plan, cfg, keep_ledger_events);
  result.private_grad.noise_sigma = sigma_dp;
  add_noise(result.private_grad, sigma_dp, rng);
  result.grad_norm = result.private_grad.norm();
  return result;
}

TrainResult train(const Model& model, const Tensor& data, const Tensor& targets,
                  const GroupingPlan& plan, const ClipConfig& cfg, double sigma_dp,
                  const TrainOptions& opts, RngState& rng) {
  if (sigma_dp < 0.0) throw ParameterError("train: negative sigma");
  int N = data.dim(0);
  int B = opts.logical_batch;
  int V = opts.virtual_batch > 0 ? opts.virtual_batch : B;
  if (B <= 0 || V <= 0) throw ConfigError("train: batch sizes must be positive");
  if (B % V != 0) throw ConfigError("train: virtual batch must divide logical batch");
  if (B > N) throw ConfigError("train: logical batch larger than dataset");
  if (opts.epochs <= 0) throw ConfigError("train: epochs must be positive");
  int steps_per_epoch = N / B;

  TrainResult result;
  result.model = model;
  int L = model.arch.num_layers();

  std::vector<Tensor> m1, m2;  // AdamW moments
  if (opts.optimizer == Optimizer::AdamW) {
    for (int l = 0; l < L; ++l) {
      m1.emplace_back(model.weights[static_cast<size_t>(l)].shape);
      m2.emplace_back(model.weights[static_cast<size_t>(l)].shape);
    }
  }

  long long step = 0;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    for (int s = 0; s < steps_per_epoch; ++s, ++step) {
      int start = s * B;
      PrivateGradient acc;
      acc.noise_sigma = sigma_dp;
      acc.sensitivity_norm =
          cfg.function == ClipFunction::Auto ? 1.0 : plan.threshold_norm();
      std::vector<int64_t> peaks(static_cast<size_t>(plan.M), 0);
      double loss = 0.0;
      for (int off = 0; off < B; off += V) {
        Tensor xb = take_rows(data, start + off, V);
        Tensor yb = take_rows(targets, start + off, V);
        StepResult part = scheduled_clipped_sums(result.model, xb, yb, plan, cfg, false);
        accumulate(acc, part.private_grad);
        for (int m = 0; m < plan.M; ++m)
          peaks[static_cast<size_t>(m)] =
              std::max(peaks[static_cast<size_t>(m)], part.per_group_peaks[static_cast<size_t>(m)]);
        loss += part.loss;
      }
      add_noise(acc, sigma_dp, rng);
      if (!std::isfinite(loss)) throw RunError("train: non-finite loss", step);

      double bias1 = 1.0, bias2 = 1.0;
      if (opts.optimizer == Optimizer::AdamW) {
        bias1 = 1.0 - std::pow(TrainOptions::kBeta1, static_cast<double>(step + 1));
        bias2 = 1.0 - std::pow(TrainOptions::kBeta2, static_cast<double>(step + 1));
      }
      for (int l = 0; l < L; ++l) {
        Tensor& w = result.model.weights[static_cast<size_t>(l)];
        const Tensor& g = acc.layer_grads[static_cast<size_t>(l)];
        if (opts.optimizer == Optimizer::Sgd) {
          for (size_t k = 0; k < w.data.size(); ++k)
            w.data[k] -= opts.lr * (g.data[k] + opts.weight_decay * w.data[k]);
        } else {
          Tensor& m = m1[static_cast<size_t>(l)];
          Tensor& v = m2[static_cast<size_t>(l)];
          for (size_t k = 0; k < w.data.size(); ++k) {
            m.data[k] = TrainOptions::kBeta1 * m.data[k] + (1.0 - TrainOptions::kBeta1) * g.data[k];
            v.data[k] = TrainOptions::kBeta2 * v.data[k] +
                        (1.0 - TrainOptions::kBeta2) * g.data[k] * g.data[k];
            double mh = m.data[k] / bias1;
            double vh = v.data[k] / bias2;
            w.data[k] -= opts.lr * (mh / (std::sqrt(vh) + TrainOptions::kAdamEps) +
                                    opts.weight_decay * w.data[k]);
          }
        }
        if (!all_finite(w)) throw RunError("train: non-finite weights in layer " + std::to_string(l), step);
      }

      TrajectoryRow row;
      row.step = step;
      row.loss = loss;
      row.grad_norm = acc.norm();
      row.per_group_peaks = peaks;
      row.max_peak_bytes = *std::max_element(peaks.begin(), peaks.end());
      result.trajectory.push_back(std::move(row));
    }
  }
  return result;
}

}  // namespace dpopt
