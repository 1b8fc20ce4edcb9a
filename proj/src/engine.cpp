// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#include "dpopt/engine.hpp"

#include <cmath>

namespace dpopt {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "identity";
}

std::string to_string(Loss l) {
  switch (l) {
    case Loss::MeanSquaredError: return "mean-squared-error";
    case Loss::SoftmaxCrossEntropy: return "softmax-cross-entropy";
    case Loss::PerSampleSum: return "per-sample-sum";
  }
  return "mean-squared-error";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::Identity;
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + s + "'");
}

Loss loss_from_string(const std::string& s) {
  if (s == "mean-squared-error") return Loss::MeanSquaredError;
  if (s == "softmax-cross-entropy") return Loss::SoftmaxCrossEntropy;
  if (s == "per-sample-sum") return Loss::PerSampleSum;
  throw ConfigError("unknown loss '" + s + "'");
}

int64_t ArchitectureSpec::param_count() const {
  int64_t n = 0;
  for (const auto& l : layers) n += static_cast<int64_t>(l.d) * l.p;
  return n;
}

void ArchitectureSpec::validate() const {
  if (layers.empty()) throw ConfigError("architecture: needs at least one layer");
  for (size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.T <= 0 || l.d <= 0 || l.p <= 0)
      throw ConfigError("architecture: layer " + std::to_string(i) + " has non-positive dims");
    if (l.T != layers[0].T)
      throw ConfigError("architecture: sequence length must be constant across layers");
    if (i + 1 < layers.size() && l.p != layers[i + 1].d)
      throw ConfigError("architecture: layer " + std::to_string(i) + " output width " +
                        std::to_string(l.p) + " does not feed layer " + std::to_string(i + 1) +
                        " input width " + std::to_string(layers[i + 1].d));
  }
}

ArchitectureSpec ArchitectureSpec::from_json(const nlohmann::json& j) {
  ArchitectureSpec arch;
  if (!j.contains("layers") || !j["layers"].is_array())
    throw ConfigError("architecture: missing 'layers' array");
  int idx = 0;
  for (const auto& jl : j["layers"]) {
    LayerSpec l;
    l.index = idx++;
    l.T = jl.value("T", 1);
    l.d = jl.at("d").get<int>();
    l.p = jl.at("p").get<int>();
    l.act = activation_from_string(jl.value("act", std::string("identity")));
    arch.layers.push_back(l);
  }
  arch.loss = loss_from_string(j.value("loss", std::string("mean-squared-error")));
  arch.validate();
  return arch;
}

nlohmann::json ArchitectureSpec::to_json() const {
  nlohmann::json j;
  j["layers"] = nlohmann::json::array();
  for (const auto& l : layers)
    j["layers"].push_back({{"T", l.T}, {"d", l.d}, {"p", l.p}, {"act", to_string(l.act)}});
  j["loss"] = to_string(loss);
  return j;
}

Model Model::init(const ArchitectureSpec& arch, RngState& rng) {
  arch.validate();
  Model m;
  m.arch = arch;
  for (const auto& l : arch.layers)
    m.weights.push_back(gaussian(rng, {l.d, l.p}, 1.0 / std::sqrt(static_cast<double>(l.d))));
  return m;
}

double ForwardCache::total_loss() const {
  double acc = 0.0;
  for (double v : per_sample_loss.data) acc += v;
  return acc;
}

namespace {

Tensor apply_activation(const Tensor& s, Activation act) {
  if (act == Activation::Identity) return s;
  Tensor out = s;
  double* p = out.ptr();
  int64_t n = out.size();
  if (act == Activation::Relu) {
    for (int64_t i = 0; i < n; ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
  } else {
    for (int64_t i = 0; i < n; ++i) p[i] = std::tanh(p[i]);
  }
  return out;
}

// Derivative of the activation evaluated from the pre-activation value.
// relu'(0) is defined as 0.
inline double activation_deriv(double s, Activation act) {
  switch (act) {
    case Activation::Identity: return 1.0;
    case Activation::Relu: return s > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      double t = std::tanh(s);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

void per_sample_losses(const ArchitectureSpec& arch, const Tensor& output, const Tensor& targets,
                       Tensor& loss_out) {
  int B = output.dim(0), T = output.dim(1), p = output.dim(2);
  loss_out = Tensor({B});
  switch (arch.loss) {
    case Loss::PerSampleSum: {
      for (int i = 0; i < B; ++i) {
        double acc = 0.0;
        const double* o = output.ptr() + static_cast<int64_t>(i) * T * p;
        for (int64_t k = 0; k < static_cast<int64_t>(T) * p; ++k) acc += o[k];
        loss_out.data[static_cast<size_t>(i)] = acc;
      }
      break;
    }
    case Loss::MeanSquaredError: {
      if (targets.shape != output.shape)
        throw DimensionError("forward: targets shape " + shape_str(targets.shape) +
                             " does not match output shape " + shape_str(output.shape));
      double inv = 1.0 / (static_cast<double>(T) * p);
      for (int i = 0; i < B; ++i) {
        double acc = 0.0;
        const double* o = output.ptr() + static_cast<int64_t>(i) * T * p;
        const double* y = targets.ptr() + static_cast<int64_t>(i) * T * p;
        for (int64_t k = 0; k < static_cast<int64_t>(T) * p; ++k) {
          double r = o[k] - y[k];
          acc += r * r;
        }
        loss_out.data[static_cast<size_t>(i)] = acc * inv;
      }
      break;
    }
    case Loss::SoftmaxCrossEntropy: {
      if (targets.rank() != 2 || targets.dim(0) != B || targets.dim(1) != T)
        throw DimensionError("forward: label tensor must be [B,T] = [" + std::to_string(B) + "," +
                             std::to_string(T) + "], got " + shape_str(targets.shape));
      for (int i = 0; i < B; ++i) {
        double acc = 0.0;
        for (int t = 0; t < T; ++t) {
          const double* z = output.ptr() + (static_cast<int64_t>(i) * T + t) * p;
          int label = static_cast<int>(targets.ptr()[static_cast<int64_t>(i) * T + t]);
          if (label < 0 || label >= p)
            throw DomainError("forward: label " + std::to_string(label) + " outside [0, " +
                              std::to_string(p) + ")");
          double mx = z[0];
          for (int j = 1; j < p; ++j) mx = std::max(mx, z[j]);
          double lse = 0.0;
          for (int j = 0; j < p; ++j) lse += std::exp(z[j] - mx);
          acc += mx + std::log(lse) - z[label];
        }
        loss_out.data[static_cast<size_t>(i)] = acc / T;
      }
      break;
    }
  }
}

}  // namespace

ForwardCache forward(const Model& model, const Tensor& batch, const Tensor& targets) {
  const ArchitectureSpec& arch = model.arch;
  arch.validate();
  if (batch.rank() != 3)
    throw DimensionError("forward: batch must be [B,T,d], got " + shape_str(batch.shape));
  if (batch.dim(1) != arch.layers[0].T || batch.dim(2) != arch.layers[0].d)
    throw DimensionError("forward: batch " + shape_str(batch.shape) + " does not match first layer [T,d] = [" +
                         std::to_string(arch.layers[0].T) + "," + std::to_string(arch.layers[0].d) + "]");

  ForwardCache cache;
  cache.B = batch.dim(0);
  cache.T = batch.dim(1);
  cache.targets = targets;
  int L = arch.num_layers();
  cache.activations.reserve(static_cast<size_t>(L));
  cache.preacts.resize(static_cast<size_t>(L));

  Tensor a = batch;
  int64_t rows = static_cast<int64_t>(cache.B) * cache.T;
  for (int l = 0; l < L; ++l) {
    const LayerSpec& spec = arch.layers[static_cast<size_t>(l)];
    Tensor s({cache.B, cache.T, spec.p});
    matmul_raw(a.ptr(), rows, spec.d, model.weights[static_cast<size_t>(l)].ptr(), spec.p, s.ptr());
    cache.activations.push_back(std::move(a));
    a = apply_activation(s, spec.act);
    cache.preacts[static_cast<size_t>(l)] = std::move(s);
  }
  cache.output = std::move(a);
  per_sample_losses(arch, cache.output, targets, cache.per_sample_loss);
  cache.next_backward = L - 1;
  return cache;
}

Tensor loss_output_gradient(const ForwardCache& cache, Loss loss) {
  const Tensor& output = cache.output;
  int B = output.dim(0), T = output.dim(1), p = output.dim(2);
  Tensor g({B, T, p});
  switch (loss) {
    case Loss::PerSampleSum: {
      for (double& v : g.data) v = 1.0;
      break;
    }
    case Loss::MeanSquaredError: {
      double inv = 2.0 / (static_cast<double>(T) * p);
      for (int64_t k = 0; k < g.size(); ++k)
        g.data[static_cast<size_t>(k)] = inv * (output.data[static_cast<size_t>(k)] -
                                                cache.targets.data[static_cast<size_t>(k)]);
      break;
    }
    case Loss::SoftmaxCrossEntropy: {
      for (int i = 0; i < B; ++i) {
        for (int t = 0; t < T; ++t) {
          const double* z = output.ptr() + (static_cast<int64_t>(i) * T + t) * p;
          double* gi = g.ptr() + (static_cast<int64_t>(i) * T + t) * p;
          int label = static_cast<int>(cache.targets.ptr()[static_cast<int64_t>(i) * T + t]);
          double mx = z[0];
          for (int j = 1; j < p; ++j) mx = std::max(mx, z[j]);
          double lse = 0.0;
          for (int j = 0; j < p; ++j) lse += std::exp(z[j] - mx);
          for (int j = 0; j < p; ++j) gi[j] = std::exp(z[j] - mx) / lse / T;
          gi[label] -= 1.0 / T;
        }
      }
      break;
    }
  }
  return g;
}

Tensor backward_layer(const Model& model, ForwardCache& cache, int l, const Tensor& upstream) {
  int L = model.arch.num_layers();
  if (l < 0 || l >= L) throw SchedulingError("backward_layer: layer " + std::to_string(l) + " out of range");
  if (l != cache.next_backward)
    throw SchedulingError("backward_layer: expected layer " + std::to_string(cache.next_backward) +
                          ", got " + std::to_string(l));
  const LayerSpec& spec = model.arch.layers[static_cast<size_t>(l)];
  if (upstream.shape != std::vector<int>{cache.B, cache.T, spec.p})
    throw DimensionError("backward_layer: upstream shape " + shape_str(upstream.shape) +
                         " does not match [B,T,p] = [" + std::to_string(cache.B) + "," +
                         std::to_string(cache.T) + "," + std::to_string(spec.p) + "]");
  Tensor g = upstream;
  if (spec.act != Activation::Identity) {
    const Tensor& s = cache.preacts[static_cast<size_t>(l)];
    for (int64_t k = 0; k < g.size(); ++k)
      g.data[static_cast<size_t>(k)] *= activation_deriv(s.data[static_cast<size_t>(k)], spec.act);
  }
  cache.next_backward = l - 1;
  return g;
}

Tensor input_gradient(const Model& model, int l, const Tensor& out_grad_l) {
  const LayerSpec& spec = model.arch.layers[static_cast<size_t>(l)];
  int B = out_grad_l.dim(0), T = out_grad_l.dim(1);
  Tensor g({B, T, spec.d});
  matmul_nt_raw(out_grad_l.ptr(), static_cast<int64_t>(B) * T, spec.p,
                model.weights[static_cast<size_t>(l)].ptr(), spec.d, g.ptr());
  return g;
}

Tensor ghost_norm(const Tensor& a_l, const Tensor& out_grad_l) {
  if (a_l.rank() != 3 || out_grad_l.rank() != 3 || a_l.dim(0) != out_grad_l.dim(0) ||
      a_l.dim(1) != out_grad_l.dim(1))
    throw DimensionError("ghost_norm: batch/time mismatch, " + shape_str(a_l.shape) + " vs " +
                         shape_str(out_grad_l.shape));
  int B = a_l.dim(0), T = a_l.dim(1), d = a_l.dim(2), p = out_grad_l.dim(2);
  Tensor out({B});
  double* res = out.ptr();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < B; ++i) {
    const double* a = a_l.ptr() + static_cast<int64_t>(i) * T * d;
    const double* g = out_grad_l.ptr() + static_cast<int64_t>(i) * T * p;
    if (T == 1) {
      double na = 0.0, ng = 0.0;
      for (int k = 0; k < d; ++k) na += a[k] * a[k];
      for (int k = 0; k < p; ++k) ng += g[k] * g[k];
      res[i] = na * ng;
    } else {
      double acc = 0.0;
      for (int t = 0; t < T; ++t) {
        for (int u = 0; u < T; ++u) {
          double aa = 0.0, gg = 0.0;
          const double* at = a + static_cast<int64_t>(t) * d;
          const double* au = a + static_cast<int64_t>(u) * d;
          for (int k = 0; k < d; ++k) aa += at[k] * au[k];
          const double* gt = g + static_cast<int64_t>(t) * p;
          const double* gu = g + static_cast<int64_t>(u) * p;
          for (int k = 0; k < p; ++k) gg += gt[k] * gu[k];
          acc += aa * gg;
        }
      }
      res[i] = acc;
    }
  }
  return out;
}

Tensor clipped_weight_grad(const Tensor& a_l, const Tensor& out_grad_l, const Tensor& clip_factors) {
  if (a_l.rank() != 3 || out_grad_l.rank() != 3 || a_l.dim(0) != out_grad_l.dim(0) ||
      a_l.dim(1) != out_grad_l.dim(1))
    throw DimensionError("clipped_weight_grad: batch/time mismatch, " + shape_str(a_l.shape) + " vs " +
                         shape_str(out_grad_l.shape));
  int B = a_l.dim(0), T = a_l.dim(1), d = a_l.dim(2), p = out_grad_l.dim(2);
  if (clip_factors.size() != B)
    throw DimensionError("clipped_weight_grad: " + std::to_string(clip_factors.size()) +
                         " clip factors for batch of " + std::to_string(B));
  Tensor scaled = out_grad_l;
  double* s = scaled.ptr();
  for (int i = 0; i < B; ++i) {
    double c = clip_factors.data[static_cast<size_t>(i)];
    double* row = s + static_cast<int64_t>(i) * T * p;
    for (int64_t k = 0; k < static_cast<int64_t>(T) * p; ++k) row[k] *= c;
  }
  Tensor g({d, p});
  matmul_tn_raw(a_l.ptr(), static_cast<int64_t>(B) * T, d, scaled.ptr(), p, g.ptr());
  return g;
}

}  // namespace dpopt
