// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line surface. Subcommands: train, profile, verify, plotdata,
// account, calibrate. Artifacts are deterministic for a fixed config; all
// timing output goes to stderr so captured stdout stays byte-stable.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dpopt/accountant.hpp"
#include "dpopt/config.hpp"
#include "dpopt/memory_planner.hpp"
#include "dpopt/scheduler.hpp"
#include "dpopt/theory.hpp"
#include "dpopt/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Shortest decimal that round-trips the double, for byte-stable CSV output.
std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dpopt::ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw dpopt::ConfigError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw dpopt::ConfigError("write to '" + path.string() + "' failed");
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw dpopt::ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

// CLI --out beats the config; the environment variable replaces the built-in
// default when the config leaves out_dir alone.
std::string resolve_out_dir(const dpopt::RunConfig& cfg, const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (cfg.out_dir == "runs") {
    if (const char* env = std::getenv("DPOPT_OUT_DIR"); env && *env) return env;
  }
  return cfg.out_dir;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_train(const std::string& config_path, const std::string& cli_out) {
  dpopt::RunConfig cfg = dpopt::RunConfig::from_file(config_path);
  cfg.validate();
  dpopt::Dataset data = dpopt::resolve_dataset(cfg);
  const dpopt::ArchitectureSpec& arch = cfg.arch;
  if (data.feature_dim() != arch.layers.front().d)
    throw dpopt::ConfigError("dataset feature dimension " + std::to_string(data.feature_dim()) +
                             " does not match the first layer input " +
                             std::to_string(arch.layers.front().d));
  if (data.loss != arch.loss)
    throw dpopt::ConfigError("dataset loss does not match the architecture loss");

  std::vector<dpopt::GroupingPlan> plans;
  for (const auto& spec : cfg.plans) plans.push_back(spec.build(arch));

  long long steps_per_epoch = data.num_samples() / cfg.train.logical_batch;
  if (steps_per_epoch == 0)
    throw dpopt::ConfigError("logical batch exceeds the dataset size");
  long long steps = static_cast<long long>(cfg.train.epochs) * steps_per_epoch;
  double sigma = dpopt::resolve_sigma(cfg, steps);

  int P = static_cast<int>(plans.size());
  int S = static_cast<int>(cfg.seeds.size());
  std::vector<dpopt::TrainResult> results(static_cast<size_t>(P) * S);
  std::atomic<bool> failed{false};
  bool diverged = false;
  std::string fail_msg;

#pragma omp parallel for collapse(2) schedule(dynamic)
  for (int pi = 0; pi < P; ++pi) {
    for (int si = 0; si < S; ++si) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        dpopt::RngState root(cfg.seeds[static_cast<size_t>(si)]);
        dpopt::RngState init = root.substream(0);
        dpopt::RngState noise = root.substream(1);
        dpopt::Model model = dpopt::Model::init(arch, init);
        results[static_cast<size_t>(pi) * S + si] =
            dpopt::train(model, data.X, data.Y, plans[static_cast<size_t>(pi)], cfg.clip, sigma,
                         cfg.train, noise);
      } catch (const dpopt::RunError& e) {
#pragma omp critical(dpopt_train_fail)
        if (!failed.load()) {
          fail_msg = e.what();  // carries the failing step index
          diverged = true;
          failed.store(true);
        }
      } catch (const std::exception& e) {
#pragma omp critical(dpopt_train_fail)
        if (!failed.load()) {
          fail_msg = e.what();
          failed.store(true);
        }
      }
    }
  }
  if (failed.load()) {
    if (diverged) {
      std::cerr << "error: " << fail_msg << "\n";
      return 3;
    }
    throw dpopt::Error(fail_msg);
  }

  fs::path out_dir = resolve_out_dir(cfg, cli_out);
  fs::create_directories(out_dir);

  json summary;
  summary["schema"] = 1;
  summary["config"] = cfg.to_json();
  summary["sigma_dp"] = sigma;
  summary["steps"] = steps;
  json runs = json::array();
  for (int pi = 0; pi < P; ++pi) {
    for (int si = 0; si < S; ++si) {
      const dpopt::TrainResult& res = results[static_cast<size_t>(pi) * S + si];
      uint64_t seed = cfg.seeds[static_cast<size_t>(si)];
      std::string csv_name =
          "trajectory_plan" + std::to_string(pi) + "_seed" + std::to_string(seed) + ".csv";
      std::ostringstream csv;
      csv << "step,loss,grad_norm,max_peak_bytes\n";
      double min_gn = std::numeric_limits<double>::max();
      int64_t max_peak = 0;
      for (const auto& row : res.trajectory) {
        csv << row.step << ',' << fmt(row.loss) << ',' << fmt(row.grad_norm) << ','
            << row.max_peak_bytes << '\n';
        min_gn = std::min(min_gn, row.grad_norm);
        max_peak = std::max(max_peak, row.max_peak_bytes);
      }
      write_text(out_dir / csv_name, csv.str());
      std::cout << "wrote " << (out_dir / csv_name).string() << "\n";

      json run;
      run["plan_index"] = pi;
      run["style"] = dpopt::to_string(plans[static_cast<size_t>(pi)].style);
      run["num_groups"] = plans[static_cast<size_t>(pi)].M;
      run["seed"] = seed;
      run["steps"] = steps;
      run["final_loss"] = res.trajectory.empty() ? 0.0 : res.trajectory.back().loss;
      run["min_grad_norm"] = min_gn;
      run["max_peak_bytes"] = max_peak;
      run["trajectory_csv"] = csv_name;
      runs.push_back(run);
    }
  }
  summary["runs"] = runs;
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  std::cout << "wrote " << (out_dir / "summary.json").string() << "\n";
  return 0;
}

int cmd_profile(const std::string& arch_path, const std::string& style, int k,
                const std::vector<int>& boundaries, int B, bool sweep,
                const std::string& out_path) {
  dpopt::ArchitectureSpec arch = dpopt::ArchitectureSpec::from_json(parse_json_file(arch_path));
  if (sweep) {
    std::vector<dpopt::RankedPlan> ranked = dpopt::plan_search(arch, B, dpopt::SearchMode::TwoGroupSweep);
    std::vector<std::pair<int, double>> rows;
    for (const auto& r : ranked) rows.emplace_back(r.plan.groups[1].front(), r.report.max_peak);
    std::sort(rows.begin(), rows.end());
    std::ostringstream os;
    os << "boundary,max_peak_floats,max_peak_bytes\n";
    for (const auto& [b, peak] : rows)
      os << b << ',' << fmt(peak) << ',' << static_cast<int64_t>(peak) * 8 << '\n';
    emit(out_path, os.str());
    return 0;
  }
  dpopt::PlanSpec spec;
  spec.style = dpopt::grouping_style_from_string(style);
  spec.params.k = k;
  spec.params.boundaries = boundaries;
  dpopt::GroupingPlan plan = spec.build(arch);
  dpopt::PeakReport rep = dpopt::analytic_peaks(arch, plan, B);
  json doc;
  doc["schema"] = 1;
  doc["batch"] = B;
  doc["num_groups"] = plan.M;
  doc["style"] = dpopt::to_string(plan.style);
  doc["per_group_peak_floats"] = rep.per_group_peaks;
  doc["max_peak_floats"] = rep.max_peak;
  json bytes = json::array();
  for (double p : rep.per_group_peaks) bytes.push_back(static_cast<int64_t>(p) * 8);
  doc["per_group_peak_bytes"] = bytes;
  doc["max_peak_bytes"] = static_cast<int64_t>(rep.max_peak) * 8;
  doc["argmax_group"] = rep.argmax_group;
  emit(out_path, doc.dump(2) + "\n");
  return 0;
}

int cmd_verify(std::vector<std::string> names, int trials, int layers, long long draws,
               const std::string& out_path) {
  if (names.empty() || (names.size() == 1 && names[0] == "all")) names = dpopt::verify_suite_names();
  std::ostringstream report;
  bool ok = true;
  for (const std::string& name : names) {
    dpopt::SuiteResult r;
    if (name == "ghost-norm") {
      r = dpopt::verify_ghost_norm(trials > 0 ? trials : 200);
    } else if (name == "clipped-sum") {
      r = dpopt::verify_clipped_sum(trials > 0 ? trials : 200);
    } else if (name == "schedule") {
      r = dpopt::verify_schedule_equivalence(trials > 0 ? trials : 50);
    } else if (name == "fact1") {
      r = dpopt::verify_ledger_agreement(trials > 0 ? trials : 50, dpopt::kVerifySeed,
                                         layers > 0 ? layers : 10);
    } else if (name == "measure") {
      r = dpopt::verify_measure_roundtrip(trials > 0 ? trials : 1000);
    } else if (name == "lemma") {
      r = dpopt::verify_lemma_bound(trials > 0 ? trials : 50, draws > 0 ? draws : 1000000);
    } else if (name == "counterexample") {
      std::vector<std::string> trace;
      r = dpopt::verify_counterexample(trials > 0 ? trials : 100, dpopt::kVerifySeed, &trace);
      report << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
      for (const auto& line : trace) report << "    " << line << "\n";
      ok = ok && r.pass;
      continue;
    } else {
      r = dpopt::run_verify_suite(name);
    }
    report << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.pass;
  }
  report << (ok ? "all suites passed" : "FAILURES above") << "\n";
  emit(out_path, report.str());
  if (!out_path.empty()) std::cout << (ok ? "all suites passed" : "FAILURES above") << "\n";
  return ok ? 0 : 1;
}

int cmd_plotdata(const std::vector<std::string>& summary_paths, const std::string& kind,
                 const std::string& out_path) {
  std::vector<json> runs;
  for (const auto& path : summary_paths) {
    json doc = parse_json_file(path);
    if (!doc.is_object() || !doc.contains("runs") || !doc["runs"].is_array())
      throw dpopt::ConfigError("'" + path + "' is not a run summary");
    for (const auto& r : doc["runs"]) runs.push_back(r);
  }
  if (runs.empty()) throw dpopt::ConfigError("no runs found in the given summaries");

  std::ostringstream os;
  if (kind == "peak-vs-M" || kind == "accuracy-vs-M") {
    std::vector<std::tuple<int, uint64_t, std::string, double>> rows;
    for (const auto& r : runs) {
      int M = r.at("num_groups").get<int>();
      uint64_t seed = r.at("seed").get<uint64_t>();
      if (kind == "peak-vs-M") {
        rows.emplace_back(M, seed, "max_peak_bytes", r.at("max_peak_bytes").get<double>());
      } else {
        rows.emplace_back(M, seed, "final_loss", r.at("final_loss").get<double>());
        rows.emplace_back(M, seed, "min_grad_norm", r.at("min_grad_norm").get<double>());
      }
    }
    std::sort(rows.begin(), rows.end());
    os << "num_groups,seed,metric,value\n";
    for (const auto& [M, seed, metric, value] : rows)
      os << M << ',' << seed << ',' << metric << ',' << fmt(value) << '\n';
  } else if (kind == "convergence") {
    std::map<long long, std::vector<double>> by_T;
    for (const auto& r : runs)
      by_T[r.at("steps").get<long long>()].push_back(r.at("min_grad_norm").get<double>());
    if (by_T.size() < 2)
      throw dpopt::ConfigError("convergence plot needs runs at two or more step horizons");
    os << "T,median_min_grad_norm\n";
    std::vector<double> xs, ys;
    for (const auto& [T, values] : by_T) {
      double med = median_of(values);
      os << T << ',' << fmt(med) << '\n';
      xs.push_back(std::log10(static_cast<double>(T)));
      ys.push_back(std::log10(med));
    }
    double n = static_cast<double>(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    os << "# slope," << fmt((n * sxy - sx * sy) / (n * sxx - sx * sx)) << '\n';
  } else {
    throw dpopt::ConfigError("unknown plot kind '" + kind +
                             "' (expected peak-vs-M, accuracy-vs-M or convergence)");
  }
  emit(out_path, os.str());
  return 0;
}

int cmd_account(double sigma, long long steps, double delta, double sensitivity,
                const std::string& out_path) {
  dpopt::PrivacyLedger ledger;
  ledger.sigma = sigma;
  ledger.steps = steps;
  ledger.delta = delta;
  ledger.sensitivity = sensitivity;
  ledger.alphas = dpopt::default_alpha_grid();
  dpopt::EpsilonReport rep = dpopt::compose_and_convert(ledger);
  json doc;
  doc["schema"] = 1;
  doc["sigma"] = sigma;
  doc["steps"] = steps;
  doc["delta"] = delta;
  doc["sensitivity"] = sensitivity;
  doc["epsilon"] = rep.epsilon;
  doc["best_alpha"] = rep.best_alpha;
  emit(out_path, doc.dump(2) + "\n");
  return 0;
}

int cmd_calibrate(double epsilon, long long steps, double delta, double sensitivity,
                  const std::string& out_path) {
  double sigma = dpopt::calibrate_sigma(epsilon, delta, steps, sensitivity);
  dpopt::PrivacyLedger ledger;
  ledger.sigma = sigma;
  ledger.steps = steps;
  ledger.delta = delta;
  ledger.sensitivity = sensitivity;
  ledger.alphas = dpopt::default_alpha_grid();
  json doc;
  doc["schema"] = 1;
  doc["target_epsilon"] = epsilon;
  doc["steps"] = steps;
  doc["delta"] = delta;
  doc["sensitivity"] = sensitivity;
  doc["sigma"] = sigma;
  doc["achieved_epsilon"] = dpopt::compose_and_convert(ledger).epsilon;
  emit(out_path, doc.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"group-wise clipped differentially private optimization laboratory"};
  app.require_subcommand(1);

  std::string config_path, cli_out;
  CLI::App* train = app.add_subcommand("train", "run every (plan, seed) pair from a config");
  train->add_option("--config", config_path, "run configuration JSON")->required();
  train->add_option("--out", cli_out, "output directory (overrides config and DPOPT_OUT_DIR)");

  std::string arch_path, style = "all-layer", profile_out;
  std::vector<int> boundaries;
  int k = 1, batch = 1;
  bool sweep = false;
  CLI::App* profile = app.add_subcommand("profile", "closed-form peak memory for a plan");
  profile->add_option("--arch", arch_path, "architecture JSON file")->required();
  profile->add_option("--style", style, "grouping style");
  profile->add_option("--k", k, "group count for uniform style");
  profile->add_option("--boundaries", boundaries, "split points for non-uniform style");
  profile->add_option("--batch", batch, "batch size")->check(CLI::PositiveNumber);
  profile->add_flag("--sweep", sweep, "two-group boundary sweep table instead of one plan");
  profile->add_option("--out", profile_out, "write here instead of stdout");

  std::vector<std::string> suites;
  int trials = 0, layers = 0;
  long long draws = 0;
  std::string verify_out;
  CLI::App* verify = app.add_subcommand("verify", "oracle and invariant suites");
  verify->add_option("suites", suites, "suite names, or 'all'");
  verify->add_option("--trials", trials, "override the instance count");
  verify->add_option("--layers", layers, "maximum layer count (fact1)");
  verify->add_option("--draws", draws, "Monte Carlo draws per config (lemma)");
  verify->add_option("--out", verify_out, "write the report here instead of stdout");

  std::vector<std::string> summaries;
  std::string kind = "peak-vs-M", plot_out;
  CLI::App* plotdata = app.add_subcommand("plotdata", "tidy CSV from run summaries");
  plotdata->add_option("summaries", summaries, "summary JSON files")->required();
  plotdata->add_option("--kind", kind, "peak-vs-M, accuracy-vs-M or convergence");
  plotdata->add_option("--out", plot_out, "write here instead of stdout");

  double sigma = 1.0, delta = 1e-5, sensitivity = 1.0, epsilon = 1.0;
  long long steps = 1;
  std::string account_out, calibrate_out;
  CLI::App* account = app.add_subcommand("account", "epsilon for a noise multiplier");
  account->add_option("--sigma", sigma, "noise multiplier")->required();
  account->add_option("--steps", steps, "composed mechanism invocations");
  account->add_option("--delta", delta, "target delta");
  account->add_option("--sensitivity", sensitivity, "L2 sensitivity per step");
  account->add_option("--out", account_out, "write here instead of stdout");

  CLI::App* calibrate = app.add_subcommand("calibrate", "noise multiplier for a target epsilon");
  calibrate->add_option("--epsilon", epsilon, "target epsilon")->required();
  calibrate->add_option("--steps", steps, "composed mechanism invocations");
  calibrate->add_option("--delta", delta, "target delta");
  calibrate->add_option("--sensitivity", sensitivity, "L2 sensitivity per step");
  calibrate->add_option("--out", calibrate_out, "write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  auto t0 = std::chrono::steady_clock::now();
  int rc = 0;
  try {
    if (train->parsed()) rc = cmd_train(config_path, cli_out);
    if (profile->parsed()) rc = cmd_profile(arch_path, style, k, boundaries, batch, sweep, profile_out);
    if (verify->parsed()) rc = cmd_verify(suites, trials, layers, draws, verify_out);
    if (plotdata->parsed()) rc = cmd_plotdata(summaries, kind, plot_out);
    if (account->parsed()) rc = cmd_account(sigma, steps, delta, sensitivity, account_out);
    if (calibrate->parsed()) rc = cmd_calibrate(epsilon, steps, delta, sensitivity, calibrate_out);
  } catch (const dpopt::RunError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
  std::cerr << "elapsed " << ms.count() << " ms\n";
  return rc;
}
