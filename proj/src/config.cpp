// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#include "dpopt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dpopt/accountant.hpp"

namespace dpopt {

namespace {

void require_object(const nlohmann::json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
}

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                         const std::string& what) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError(what + ": unknown key '" + it.key() + "'");
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

PlanSpec PlanSpec::from_json(const nlohmann::json& j) {
  require_object(j, "plan spec");
  reject_unknown_keys(j, {"style", "k", "boundaries"}, "plan spec");
  if (!j.contains("style")) throw ConfigError("plan spec: missing 'style'");
  PlanSpec spec;
  spec.style = grouping_style_from_string(j.at("style").get<std::string>());
  if (j.contains("k")) spec.params.k = j.at("k").get<int>();
  if (j.contains("boundaries")) spec.params.boundaries = j.at("boundaries").get<std::vector<int>>();
  return spec;
}

nlohmann::json PlanSpec::to_json() const {
  nlohmann::json j;
  j["style"] = to_string(style);
  if (style == GroupingStyle::Uniform) j["k"] = params.k;
  if (style == GroupingStyle::NonUniform) j["boundaries"] = params.boundaries;
  return j;
}

void RunConfig::validate() const {
  arch.validate();
  clip.validate();
  if (plans.empty()) throw ConfigError("config: 'plans' must list at least one plan");
  if (target_eps.has_value() == sigma_dp.has_value())
    throw ConfigError("config: exactly one of privacy.target_eps and privacy.sigma_dp must be set");
  if (target_eps && !(*target_eps > 0.0))
    throw ConfigError("config: privacy.target_eps must be positive");
  if (sigma_dp && *sigma_dp < 0.0) throw ConfigError("config: privacy.sigma_dp must be nonnegative");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("config: privacy.delta must lie in (0, 1)");
  if (train.epochs < 1) throw ConfigError("config: train.epochs must be at least 1");
  if (train.logical_batch < 1) throw ConfigError("config: train.logical_batch must be at least 1");
  int v = train.virtual_batch == 0 ? train.logical_batch : train.virtual_batch;
  if (v < 1 || train.logical_batch % v != 0)
    throw ConfigError("config: train.virtual_batch must divide train.logical_batch");
  if (!std::isfinite(train.lr)) throw ConfigError("config: train.lr must be finite");
  if (train.weight_decay < 0.0) throw ConfigError("config: train.weight_decay must be nonnegative");
  if (seeds.empty()) throw ConfigError("config: 'seeds' must list at least one seed");
  if (task && csv_path) throw ConfigError("config: set only one of 'task' and 'csv'");
  if (task) task->validate();
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  require_object(j, "config");
  reject_unknown_keys(
      j, {"schema", "arch", "arch_file", "plans", "train", "privacy", "clip", "task", "csv",
          "seeds", "out_dir"},
      "config");
  if (j.contains("schema") && j.at("schema").get<int>() != 1)
    throw ConfigError("config: unsupported schema version");

  RunConfig cfg;
  if (j.contains("arch") == j.contains("arch_file"))
    throw ConfigError("config: exactly one of 'arch' and 'arch_file' must be set");
  if (j.contains("arch")) {
    cfg.arch = ArchitectureSpec::from_json(j.at("arch"));
  } else {
    std::ifstream in(j.at("arch_file").get<std::string>());
    if (!in) throw ConfigError("config: cannot open arch file '" +
                               j.at("arch_file").get<std::string>() + "'");
    nlohmann::json aj;
    try {
      aj = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config: arch file is not valid JSON: ") + e.what());
    }
    cfg.arch = ArchitectureSpec::from_json(aj);
  }

  if (j.contains("plans")) {
    if (!j.at("plans").is_array()) throw ConfigError("config: 'plans' must be an array");
    for (const auto& pj : j.at("plans")) cfg.plans.push_back(PlanSpec::from_json(pj));
  } else {
    cfg.plans.push_back(PlanSpec{});
  }

  if (j.contains("train")) {
    const auto& t = j.at("train");
    require_object(t, "config.train");
    reject_unknown_keys(
        t, {"optimizer", "epochs", "logical_batch", "virtual_batch", "lr", "weight_decay"},
        "config.train");
    if (t.contains("optimizer"))
      cfg.train.optimizer = optimizer_from_string(t.at("optimizer").get<std::string>());
    cfg.train.epochs = t.value("epochs", cfg.train.epochs);
    cfg.train.logical_batch = t.value("logical_batch", cfg.train.logical_batch);
    cfg.train.virtual_batch = t.value("virtual_batch", cfg.train.virtual_batch);
    cfg.train.lr = t.value("lr", cfg.train.lr);
    cfg.train.weight_decay = t.value("weight_decay", cfg.train.weight_decay);
  }

  if (j.contains("privacy")) {
    const auto& p = j.at("privacy");
    require_object(p, "config.privacy");
    reject_unknown_keys(p, {"target_eps", "sigma_dp", "delta"}, "config.privacy");
    if (p.contains("target_eps")) cfg.target_eps = p.at("target_eps").get<double>();
    if (p.contains("sigma_dp")) cfg.sigma_dp = p.at("sigma_dp").get<double>();
    cfg.delta = p.value("delta", cfg.delta);
  }

  if (j.contains("clip")) {
    const auto& c = j.at("clip");
    require_object(c, "config.clip");
    reject_unknown_keys(c, {"function", "gamma"}, "config.clip");
    if (c.contains("function"))
      cfg.clip.function = clip_function_from_string(c.at("function").get<std::string>());
    cfg.clip.gamma = c.value("gamma", cfg.clip.gamma);
  }

  if (j.contains("task")) {
    const auto& t = j.at("task");
    require_object(t, "config.task");
    reject_unknown_keys(t, {"kind", "dimension", "samples", "label_noise", "seed"}, "config.task");
    SyntheticTask task;
    if (t.contains("kind")) task.kind = task_kind_from_string(t.at("kind").get<std::string>());
    task.dimension = t.value("dimension", task.dimension);
    task.samples = t.value("samples", task.samples);
    task.label_noise = t.value("label_noise", task.label_noise);
    task.seed = t.value("seed", task.seed);
    cfg.task = task;
  }
  if (j.contains("csv")) cfg.csv_path = j.at("csv").get<std::string>();
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();

  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["schema"] = 1;
  j["arch"] = arch.to_json();
  j["plans"] = nlohmann::json::array();
  for (const auto& p : plans) j["plans"].push_back(p.to_json());
  j["train"] = {{"optimizer", to_string(train.optimizer)},
                {"epochs", train.epochs},
                {"logical_batch", train.logical_batch},
                {"virtual_batch", train.virtual_batch},
                {"lr", train.lr},
                {"weight_decay", train.weight_decay}};
  j["privacy"] = nlohmann::json::object();
  if (target_eps) j["privacy"]["target_eps"] = *target_eps;
  if (sigma_dp) j["privacy"]["sigma_dp"] = *sigma_dp;
  j["privacy"]["delta"] = delta;
  j["clip"] = {{"function", to_string(clip.function)}, {"gamma", clip.gamma}};
  if (task)
    j["task"] = {{"kind", to_string(task->kind)},
                 {"dimension", task->dimension},
                 {"samples", task->samples},
                 {"label_noise", task->label_noise},
                 {"seed", task->seed}};
  if (csv_path) j["csv"] = *csv_path;
  j["seeds"] = seeds;
  j["out_dir"] = out_dir;
  return j;
}

Dataset load_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset '" + path + "' is empty");
  std::vector<std::string> header = split_csv_line(line);
  int label_col = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "label") {
      if (label_col >= 0) throw ConfigError("dataset '" + path + "' has two 'label' columns");
      label_col = static_cast<int>(i);
    }
  }
  if (label_col < 0) throw ConfigError("dataset '" + path + "' has no 'label' column");
  int D = static_cast<int>(header.size()) - 1;
  if (D < 1) throw ConfigError("dataset '" + path + "' has no feature columns");

  std::vector<double> features;
  std::vector<double> labels;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ConfigError("dataset '" + path + "' row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(header.size()));
    for (size_t i = 0; i < cells.size(); ++i) {
      double v;
      try {
        size_t used = 0;
        v = std::stod(cells[i], &used);
        if (used != cells[i].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw ConfigError("dataset '" + path + "' row " + std::to_string(row) + " column '" +
                          header[i] + "' is not a number: '" + cells[i] + "'");
      }
      if (static_cast<int>(i) == label_col) {
        if (v != std::floor(v) || v < 0.0)
          throw ConfigError("dataset '" + path + "' row " + std::to_string(row) +
                            ": label must be a nonnegative integer");
        labels.push_back(v);
      } else {
        features.push_back(v);
      }
    }
  }
  int N = static_cast<int>(labels.size());
  if (N < 1) throw ConfigError("dataset '" + path + "' has no data rows");

  Dataset data;
  data.X = Tensor({N, 1, D}, std::move(features));
  data.Y = Tensor({N, 1}, std::move(labels));
  data.loss = Loss::SoftmaxCrossEntropy;
  return data;
}

Dataset resolve_dataset(const RunConfig& cfg) {
  if (cfg.csv_path) return load_csv_dataset(*cfg.csv_path);
  if (cfg.task) return make_dataset(*cfg.task);
  return make_dataset(SyntheticTask{});
}

double resolve_sigma(const RunConfig& cfg, long long steps) {
  if (cfg.sigma_dp) return *cfg.sigma_dp;
  return calibrate_sigma(*cfg.target_eps, cfg.delta, steps);
}

}  // namespace dpopt
