// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#include "dpopt/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace dpopt {

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::Quadratic: return "quadratic";
    case TaskKind::Logistic: return "logistic";
    case TaskKind::TwoLayerTeacher: return "two-layer-teacher";
  }
  return "";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "quadratic") return TaskKind::Quadratic;
  if (s == "logistic") return TaskKind::Logistic;
  if (s == "two-layer-teacher") return TaskKind::TwoLayerTeacher;
  throw ConfigError("unknown task kind '" + s + "'");
}

void SyntheticTask::validate() const {
  if (dimension <= 0) throw ParameterError("synthetic task: dimension must be positive");
  if (samples <= 0) throw ParameterError("synthetic task: sample count must be positive");
  if (label_noise < 0.0) throw ParameterError("synthetic task: label noise must be nonnegative");
}

Dataset make_dataset(const SyntheticTask& task) {
  task.validate();
  int N = task.samples, D = task.dimension;
  RngState root(task.seed);
  RngState features = root.substream(1);
  RngState teacher = root.substream(2);
  RngState noise = root.substream(3);

  Dataset data;
  data.X = gaussian(features, {N, 1, D}, 1.0);

  switch (task.kind) {
    case TaskKind::Quadratic: {
      Tensor w = gaussian(teacher, {D, 1}, 1.0 / std::sqrt(static_cast<double>(D)));
      Tensor flat = data.X;
      flat.shape = {N, D};
      data.Y = matmul(flat, w);
      data.Y.shape = {N, 1, 1};
      if (task.label_noise > 0.0) {
        Tensor eps = gaussian(noise, {N, 1, 1}, task.label_noise);
        for (int64_t i = 0; i < data.Y.size(); ++i) data.Y.data[static_cast<size_t>(i)] += eps.data[static_cast<size_t>(i)];
      }
      data.loss = Loss::MeanSquaredError;
      break;
    }
    case TaskKind::Logistic: {
      Tensor w = gaussian(teacher, {D, 1}, 1.0);
      Tensor flat = data.X;
      flat.shape = {N, D};
      Tensor logits = matmul(flat, w);
      Tensor eps = gaussian(noise, {N, 1}, 1.0);
      data.Y = Tensor({N, 1});
      for (int i = 0; i < N; ++i) {
        double z = logits.data[static_cast<size_t>(i)] +
                   task.label_noise * eps.data[static_cast<size_t>(i)];
        data.Y.data[static_cast<size_t>(i)] = z > 0.0 ? 1.0 : 0.0;
      }
      data.loss = Loss::SoftmaxCrossEntropy;
      break;
    }
    case TaskKind::TwoLayerTeacher: {
      int H = D;
      Tensor U = gaussian(teacher, {D, H}, 1.0 / std::sqrt(static_cast<double>(D)));
      Tensor V = gaussian(teacher, {H, 1}, 1.0 / std::sqrt(static_cast<double>(H)));
      Tensor flat = data.X;
      flat.shape = {N, D};
      Tensor hidden = matmul(flat, U);
      for (auto& v : hidden.data) v = std::tanh(v);
      data.Y = matmul(hidden, V);
      data.Y.shape = {N, 1, 1};
      if (task.label_noise > 0.0) {
        Tensor eps = gaussian(noise, {N, 1, 1}, task.label_noise);
        for (int64_t i = 0; i < data.Y.size(); ++i) data.Y.data[static_cast<size_t>(i)] += eps.data[static_cast<size_t>(i)];
      }
      data.loss = Loss::MeanSquaredError;
      break;
    }
  }
  return data;
}

ArchitectureSpec mlp_arch(int in_dim, int width, int depth, int out_dim, Loss loss) {
  if (depth < 1) throw ParameterError("mlp_arch: depth must be at least 1");
  if (in_dim <= 0 || width <= 0 || out_dim <= 0)
    throw ParameterError("mlp_arch: dimensions must be positive");
  ArchitectureSpec arch;
  arch.loss = loss;
  for (int l = 0; l < depth; ++l) {
    LayerSpec spec;
    spec.index = l;
    spec.T = 1;
    spec.d = l == 0 ? in_dim : width;
    spec.p = l == depth - 1 ? out_dim : width;
    spec.act = l == depth - 1 ? Activation::Identity : Activation::Tanh;
    arch.layers.push_back(spec);
  }
  arch.validate();
  return arch;
}

ArchitectureSpec linear_arch(const Dataset& data) {
  int out_dim;
  if (data.loss == Loss::SoftmaxCrossEntropy) {
    double hi = 0.0;
    for (double v : data.Y.data) hi = std::max(hi, v);
    out_dim = static_cast<int>(hi) + 1;
  } else {
    out_dim = data.Y.rank() == 3 ? data.Y.dim(2) : 1;
  }
  return mlp_arch(data.feature_dim(), data.feature_dim(), 1, out_dim, data.loss);
}

}  // namespace dpopt
