// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#include "dpopt/reference.hpp"

#include <cmath>

namespace dpopt::reference {

Tensor matmul_naive(const Tensor& a, const Tensor& b) {
  int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int kk = 0; kk < k; ++kk) acc += a.data[i * k + kk] * b.data[kk * n + j];
      c.data[i * n + j] = acc;
    }
  return c;
}

Tensor matmul_nt_naive(const Tensor& a, const Tensor& b) {
  int m = a.dim(0), k = a.dim(1), n = b.dim(0);
  Tensor c({m, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int kk = 0; kk < k; ++kk) acc += a.data[i * k + kk] * b.data[j * k + kk];
      c.data[i * n + j] = acc;
    }
  return c;
}

Tensor matmul_tn_naive(const Tensor& a, const Tensor& b) {
  int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({k, n});
  for (int kk = 0; kk < k; ++kk)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < m; ++i) acc += a.data[i * k + kk] * b.data[i * n + j];
      c.data[kk * n + j] = acc;
    }
  return c;
}

double frobenius_loop(const Tensor& t) {
  double acc = 0.0;
  for (size_t i = 0; i < t.data.size(); ++i) acc += t.data[i] * t.data[i];
  return acc;
}

namespace {

double act(double x, Activation a) {
  switch (a) {
    case Activation::Identity: return x;
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Tanh: return std::tanh(x);
  }
  return x;
}

double act_deriv(double x, Activation a) {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::Relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      double t = std::tanh(x);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

struct SampleTrace {
  // per layer: input [T*d], preact [T*p]; plus final output [T*p_L]
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> preacts;
  std::vector<double> output;
};

SampleTrace forward_sample(const Model& model, const double* x, int T) {
  SampleTrace tr;
  int L = model.arch.num_layers();
  std::vector<double> a(x, x + static_cast<int64_t>(T) * model.arch.layers[0].d);
  for (int l = 0; l < L; ++l) {
    const LayerSpec& spec = model.arch.layers[static_cast<size_t>(l)];
    const Tensor& w = model.weights[static_cast<size_t>(l)];
    std::vector<double> s(static_cast<size_t>(T) * spec.p, 0.0);
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < spec.p; ++j) {
        double acc = 0.0;
        for (int k = 0; k < spec.d; ++k) acc += a[static_cast<size_t>(t) * spec.d + k] * w.data[static_cast<size_t>(k) * spec.p + j];
        s[static_cast<size_t>(t) * spec.p + j] = acc;
      }
    tr.inputs.push_back(std::move(a));
    a.resize(s.size());
    for (size_t k = 0; k < s.size(); ++k) a[k] = act(s[k], spec.act);
    tr.preacts.push_back(std::move(s));
  }
  tr.output = std::move(a);
  return tr;
}

double sample_loss(const Model& model, const SampleTrace& tr, const Tensor& targets, int i, int T) {
  const ArchitectureSpec& arch = model.arch;
  int p = arch.layers.back().p;
  switch (arch.loss) {
    case Loss::PerSampleSum: {
      double acc = 0.0;
      for (double v : tr.output) acc += v;
      return acc;
    }
    case Loss::MeanSquaredError: {
      double acc = 0.0;
      const double* y = targets.ptr() + static_cast<int64_t>(i) * T * p;
      for (size_t k = 0; k < tr.output.size(); ++k) {
        double r = tr.output[k] - y[k];
        acc += r * r;
      }
      return acc / (static_cast<double>(T) * p);
    }
    case Loss::SoftmaxCrossEntropy: {
      double acc = 0.0;
      for (int t = 0; t < T; ++t) {
        const double* z = tr.output.data() + static_cast<size_t>(t) * p;
        int label = static_cast<int>(targets.ptr()[static_cast<int64_t>(i) * T + t]);
        double mx = z[0];
        for (int j = 1; j < p; ++j) mx = std::max(mx, z[j]);
        double lse = 0.0;
        for (int j = 0; j < p; ++j) lse += std::exp(z[j] - mx);
        acc += mx + std::log(lse) - z[label];
      }
      return acc / T;
    }
  }
  return 0.0;
}

std::vector<double> loss_grad_wrt_output(const Model& model, const SampleTrace& tr,
                                         const Tensor& targets, int i, int T) {
  const ArchitectureSpec& arch = model.arch;
  int p = arch.layers.back().p;
  std::vector<double> g(tr.output.size(), 0.0);
  switch (arch.loss) {
    case Loss::PerSampleSum: {
      for (double& v : g) v = 1.0;
      break;
    }
    case Loss::MeanSquaredError: {
      const double* y = targets.ptr() + static_cast<int64_t>(i) * T * p;
      double inv = 2.0 / (static_cast<double>(T) * p);
      for (size_t k = 0; k < g.size(); ++k) g[k] = inv * (tr.output[k] - y[k]);
      break;
    }
    case Loss::SoftmaxCrossEntropy: {
      for (int t = 0; t < T; ++t) {
        const double* z = tr.output.data() + static_cast<size_t>(t) * p;
        double* gt = g.data() + static_cast<size_t>(t) * p;
        int label = static_cast<int>(targets.ptr()[static_cast<int64_t>(i) * T + t]);
        double mx = z[0];
        for (int j = 1; j < p; ++j) mx = std::max(mx, z[j]);
        double lse = 0.0;
        for (int j = 0; j < p; ++j) lse += std::exp(z[j] - mx);
        for (int j = 0; j < p; ++j) gt[j] = std::exp(z[j] - mx) / lse / T;
        gt[label] -= 1.0 / T;
      }
      break;
    }
  }
  return g;
}

std::vector<Tensor> backward_sample(const Model& model, const SampleTrace& tr, const Tensor& targets,
                                    int i, int T) {
  int L = model.arch.num_layers();
  std::vector<Tensor> grads(static_cast<size_t>(L));
  std::vector<double> delta = loss_grad_wrt_output(model, tr, targets, i, T);  // dL/da_{l+1}
  for (int l = L - 1; l >= 0; --l) {
    const LayerSpec& spec = model.arch.layers[static_cast<size_t>(l)];
    const std::vector<double>& s = tr.preacts[static_cast<size_t>(l)];
    const std::vector<double>& a = tr.inputs[static_cast<size_t>(l)];
    std::vector<double> gout(s.size());
    for (size_t k = 0; k < s.size(); ++k) gout[k] = delta[k] * act_deriv(s[k], spec.act);
    Tensor wg({spec.d, spec.p});
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < spec.d; ++k)
        for (int j = 0; j < spec.p; ++j)
          wg.data[static_cast<size_t>(k) * spec.p + j] +=
              a[static_cast<size_t>(t) * spec.d + k] * gout[static_cast<size_t>(t) * spec.p + j];
    grads[static_cast<size_t>(l)] = std::move(wg);
    if (l > 0) {
      const Tensor& w = model.weights[static_cast<size_t>(l)];
      std::vector<double> next(static_cast<size_t>(T) * spec.d, 0.0);
      for (int t = 0; t < T; ++t)
        for (int k = 0; k < spec.d; ++k) {
          double acc = 0.0;
          for (int j = 0; j < spec.p; ++j)
            acc += gout[static_cast<size_t>(t) * spec.p + j] * w.data[static_cast<size_t>(k) * spec.p + j];
          next[static_cast<size_t>(t) * spec.d + k] = acc;
        }
      delta = std::move(next);
    }
  }
  return grads;
}

}  // namespace

std::vector<double> forward_losses(const Model& model, const Tensor& batch, const Tensor& targets) {
  int B = batch.dim(0), T = batch.dim(1), d = batch.dim(2);
  std::vector<double> losses(static_cast<size_t>(B));
  for (int i = 0; i < B; ++i) {
    SampleTrace tr = forward_sample(model, batch.ptr() + static_cast<int64_t>(i) * T * d, T);
    losses[static_cast<size_t>(i)] = sample_loss(model, tr, targets, i, T);
  }
  return losses;
}

double total_loss(const Model& model, const Tensor& batch, const Tensor& targets) {
  double acc = 0.0;
  for (double v : forward_losses(model, batch, targets)) acc += v;
  return acc;
}

std::vector<std::vector<Tensor>> per_sample_grads(const Model& model, const Tensor& batch,
                                                  const Tensor& targets) {
  int B = batch.dim(0), T = batch.dim(1), d = batch.dim(2);
  std::vector<std::vector<Tensor>> out(static_cast<size_t>(B));
  for (int i = 0; i < B; ++i) {
    SampleTrace tr = forward_sample(model, batch.ptr() + static_cast<int64_t>(i) * T * d, T);
    out[static_cast<size_t>(i)] = backward_sample(model, tr, targets, i, T);
  }
  return out;
}

Tensor fd_weight_grad(const Model& model, const Tensor& batch, const Tensor& targets, int l,
                      double step) {
  Model m = model;
  Tensor& w = m.weights[static_cast<size_t>(l)];
  Tensor g(w.shape);
  for (size_t k = 0; k < w.data.size(); ++k) {
    double keep = w.data[k];
    w.data[k] = keep + step;
    double up = total_loss(m, batch, targets);
    w.data[k] = keep - step;
    double down = total_loss(m, batch, targets);
    w.data[k] = keep;
    g.data[k] = (up - down) / (2.0 * step);
  }
  return g;
}

NaivePrivateGradient naive_private_gradient(const Model& model, const Tensor& batch,
                                            const Tensor& targets,
                                            const std::vector<std::vector<int>>& groups,
                                            bool abadi, double gamma,
                                            const std::vector<double>& thresholds, double sigma_dp,
                                            RngState& rng) {
  int B = batch.dim(0);
  int L = model.arch.num_layers();
  int M = static_cast<int>(groups.size());
  auto grads = per_sample_grads(model, batch, targets);

  NaivePrivateGradient out;
  out.layer_grads.resize(static_cast<size_t>(L));
  for (int l = 0; l < L; ++l)
    out.layer_grads[static_cast<size_t>(l)] =
        Tensor({model.arch.layers[static_cast<size_t>(l)].d, model.arch.layers[static_cast<size_t>(l)].p});

  double rnorm_sq = 0.0;
  for (double r : thresholds) rnorm_sq += r * r;
  double rnorm = std::sqrt(rnorm_sq);

  for (int m = 0; m < M; ++m) {
    for (int i = 0; i < B; ++i) {
      double nsq = 0.0;
      for (int l : groups[static_cast<size_t>(m)])
        nsq += frobenius_loop(grads[static_cast<size_t>(i)][static_cast<size_t>(l)]);
      double norm = std::sqrt(nsq);
      double factor;
      if (abadi) {
        factor = norm == 0.0 ? 1.0 : std::min(1.0, thresholds[static_cast<size_t>(m)] / norm);
      } else {
        factor = 1.0 / (std::sqrt(static_cast<double>(M)) * (norm + gamma));
      }
      for (int l : groups[static_cast<size_t>(m)]) {
        Tensor& acc = out.layer_grads[static_cast<size_t>(l)];
        const Tensor& g = grads[static_cast<size_t>(i)][static_cast<size_t>(l)];
        for (size_t k = 0; k < acc.data.size(); ++k) acc.data[k] += factor * g.data[k];
      }
    }
  }
  double noise_scale = abadi ? sigma_dp * rnorm : sigma_dp;
  for (int l = 0; l < L; ++l) {
    Tensor noise = gaussian(rng, out.layer_grads[static_cast<size_t>(l)].shape, noise_scale);
    Tensor& acc = out.layer_grads[static_cast<size_t>(l)];
    for (size_t k = 0; k < acc.data.size(); ++k) acc.data[k] += noise.data[k];
  }
  return out;
}

std::vector<std::vector<std::vector<int>>> contiguous_partitions(int n) {
  std::vector<std::vector<std::vector<int>>> all;
  for (uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<std::vector<int>> plan;
    std::vector<int> cur{0};
    for (int i = 1; i < n; ++i) {
      if (mask & (1u << (i - 1))) {
        plan.push_back(cur);
        cur.clear();
      }
      cur.push_back(i);
    }
    plan.push_back(cur);
    all.push_back(plan);
  }
  return all;
}

}  // namespace dpopt::reference
