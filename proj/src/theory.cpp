// Copyright (c) 2026 dpopt authors
// SPDX-License-Identifier: Apache-2.0

#include "dpopt/theory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

namespace dpopt {

void TheoryParams::validate() const {
  if (!(xi > 0.0)) throw ParameterError("theory params: xi must be positive");
  if (!(gamma > 0.0)) throw ParameterError("theory params: gamma must be positive");
  if (!(r > 1.0)) throw ParameterError("theory params: r must exceed 1");
  if (M < 1) throw ParameterError("theory params: M must be at least 1");
  if (!(smoothness > 0.0)) throw ParameterError("theory params: smoothness must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("theory params: rho must lie in (0, 1)");
  if (!(a > 0.0)) throw ParameterError("theory params: a must be positive");
}

double distance_measure_M(double x, const TheoryParams& p) {
  p.validate();
  if (x < 0.0) throw DomainError("distance measure: x must be nonnegative");
  double A = p.xi / (p.r * std::sqrt(static_cast<double>(p.M)));
  double lo = p.gamma / ((p.r - 1.0) * (x + A) + p.gamma);
  double hi = p.gamma / ((p.r + 1.0) * (x + A) + p.gamma);
  return x * (lo - hi);
}

double distance_measure_M_inverse(double y, const TheoryParams& p) {
  p.validate();
  if (y < 0.0) throw DomainError("distance measure inverse: y must be nonnegative");
  if (y == 0.0) return 0.0;
  double q = 2.0 * p.gamma - (p.r * p.r - 1.0) * y;
  if (!(q > 0.0))
    throw DomainError("distance measure inverse: y must stay below 2 gamma / (r^2 - 1)");
  double A = p.xi / (p.r * std::sqrt(static_cast<double>(p.M)));
  double b = A + p.r * y;
  double u = p.gamma * (b + std::sqrt(b * b + q * y)) / q;
  return std::max(u - A, 0.0);
}

double distance_measure_inverse_slope(const TheoryParams& p) {
  p.validate();
  double s = p.xi / std::sqrt(static_cast<double>(p.M));
  return (p.r * p.r * (s + p.gamma) * (s + p.gamma) - s * s) / (2.0 * s * p.gamma * p.r);
}

namespace {

constexpr int64_t kMcChunk = 65536;

// One draw of the noise model at a fixed counter window, written into n.
void draw_noise(const NoiseModel& model, const TheoryParams& p, const RngState& rng, uint64_t base,
                int64_t dim, double* n) {
  double cap = p.xi / std::sqrt(static_cast<double>(p.M));
  if (model.kind == NoiseModel::Kind::GaussianIsotropic) {
    double sd = cap / std::sqrt(static_cast<double>(dim));
    for (int64_t k = 0; k < dim; ++k)
      n[k] = sd * rng.normal_at(base + 2 * static_cast<uint64_t>(k));
  } else {  // UniformBall
    double nsq = 0.0;
    for (int64_t k = 0; k < dim; ++k) {
      n[k] = rng.normal_at(base + 2 * static_cast<uint64_t>(k));
      nsq += n[k] * n[k];
    }
    double u = rng.unit_at(base + 2 * static_cast<uint64_t>(dim));
    double radius = cap * std::pow(u, 1.0 / static_cast<double>(dim));
    double scale = nsq > 0.0 ? radius / std::sqrt(nsq) : 0.0;
    for (int64_t k = 0; k < dim; ++k) n[k] *= scale;
  }
}

}  // namespace

LemmaCheck lemma_lower_bound_check(const Tensor& g, const TheoryParams& p, const NoiseModel& model,
                                   long long num_samples, RngState& rng) {
  p.validate();
  if (num_samples < 1) throw ParameterError("lower bound check: need at least one sample");
  if (model.kind == NoiseModel::Kind::AsymmetricShifted)
    throw AssumptionError("lower bound check: noise model must be symmetric about zero");
  int64_t dim = g.size();
  if (dim < 1) throw DimensionError("lower bound check: gradient must be non-empty");

  double gn = std::sqrt(frobenius_norm_sq(g));
  double x_r = gn - p.xi / (p.r * std::sqrt(static_cast<double>(p.M)));
  // Below the kink the bound degenerates; clamp it to zero there.
  double rhs = x_r > 0.0 ? 0.5 * distance_measure_M(x_r, p) : 0.0;

  uint64_t stride = 2 * static_cast<uint64_t>(dim) + 2;
  uint64_t base = rng.counter;
  int64_t chunks = (num_samples + kMcChunk - 1) / kMcChunk;
  std::vector<double> sums(static_cast<size_t>(chunks), 0.0);
  std::vector<double> sumsqs(static_cast<size_t>(chunks), 0.0);

#pragma omp parallel for schedule(static)
  for (int64_t c = 0; c < chunks; ++c) {
    std::vector<double> n(static_cast<size_t>(dim));
    double s = 0.0, s2 = 0.0;
    int64_t lo = c * kMcChunk, hi = std::min<int64_t>(num_samples, lo + kMcChunk);
    for (int64_t i = lo; i < hi; ++i) {
      draw_noise(model, p, rng, base + static_cast<uint64_t>(i) * stride, dim, n.data());
      double dot = 0.0, nsq = 0.0;
      for (int64_t k = 0; k < dim; ++k) {
        double noisy = g.data[static_cast<size_t>(k)] + n[static_cast<size_t>(k)];
        dot += g.data[static_cast<size_t>(k)] * noisy;
        nsq += noisy * noisy;
      }
      double v = dot / (std::sqrt(nsq) + p.gamma);
      s += v;
      s2 += v * v;
    }
    sums[static_cast<size_t>(c)] = s;
    sumsqs[static_cast<size_t>(c)] = s2;
  }
  rng.counter += static_cast<uint64_t>(num_samples) * stride;

  double sum = 0.0, sumsq = 0.0;
  for (int64_t c = 0; c < chunks; ++c) {
    sum += sums[static_cast<size_t>(c)];
    sumsq += sumsqs[static_cast<size_t>(c)];
  }
  LemmaCheck out;
  out.num_samples = num_samples;
  out.lhs = sum / static_cast<double>(num_samples);
  if (num_samples > 1) {
    double var = (sumsq - sum * sum / static_cast<double>(num_samples)) /
                 static_cast<double>(num_samples - 1);
    out.se = std::sqrt(std::max(var, 0.0) / static_cast<double>(num_samples));
  }
  out.rhs = rhs;
  out.pass = out.lhs >= out.rhs - 3.0 * out.se;
  return out;
}

namespace {

double vec_norm(const Tensor& t) { return std::sqrt(frobenius_norm_sq(t)); }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Group-wise clipped output of one sample's group component under candidate
// threshold rm, against the all-layer expectation expected = c_all * piece.
bool grid_candidate_matches(const Tensor& piece, double group_norm, double rm, bool abadi,
                            double gamma, double c_all) {
  double factor = abadi ? (group_norm == 0.0 ? 1.0 : std::min(1.0, rm / group_norm))
                        : rm / (group_norm + gamma);
  for (size_t k = 0; k < piece.data.size(); ++k) {
    double got = factor * piece.data[k];
    double want = c_all * piece.data[k];
    if (std::abs(got - want) > 1e-9 * std::max(1.0, std::abs(want))) return false;
  }
  return true;
}

}  // namespace

CounterexampleReport counterexample_verify(const TwoGroupSample& gi, const TwoGroupSample& gj,
                                           double R, const ClipConfig& clip,
                                           const std::vector<std::pair<double, double>>& grid) {
  clip.validate();
  if (!(R > 0.0)) throw ParameterError("counterexample: R must be positive");
  bool abadi = clip.function == ClipFunction::Abadi;

  CounterexampleReport rep;
  double ni1 = vec_norm(gi.group1), ni2 = vec_norm(gi.group2);
  double nj1 = vec_norm(gj.group1), nj2 = vec_norm(gj.group2);
  double ni = std::sqrt(ni1 * ni1 + ni2 * ni2);
  double nj = std::sqrt(nj1 * nj1 + nj2 * nj2);
  rep.trace.push_back("norms: |g_i| = " + fmt(ni) + " (" + fmt(ni1) + ", " + fmt(ni2) +
                      "), |g_j| = " + fmt(nj) + " (" + fmt(nj1) + ", " + fmt(nj2) + "), R = " +
                      fmt(R));

  bool degenerate = gi.group1.shape == gj.group1.shape && gi.group2.shape == gj.group2.shape &&
                    gi.group1.data == gj.group1.data && gi.group2.data == gj.group2.data;

  // All-layer factors; for the normalized form R acts as the overall scale.
  auto all_factor = [&](double norm) {
    return abadi ? (norm == 0.0 ? 1.0 : std::min(1.0, R / norm)) : R / (norm + clip.gamma);
  };
  double ci = all_factor(ni), cj = all_factor(nj);

  if (degenerate) {
    rep.representable = true;
    rep.has_witness = true;
    if (abadi) {
      rep.witness_r1 = ni1 > 0.0 ? (ci < 1.0 ? ci * ni1 : ni1) : 1.0;
      rep.witness_r2 = ni2 > 0.0 ? (ci < 1.0 ? ci * ni2 : ni2) : 1.0;
    } else {
      rep.witness_r1 = ni1 > 0.0 ? R * (ni1 + clip.gamma) / (ni + clip.gamma) : 1.0;
      rep.witness_r2 = ni2 > 0.0 ? R * (ni2 + clip.gamma) / (ni + clip.gamma) : 1.0;
    }
    rep.trace.push_back("identical samples: thresholds tuned to the one free sample, witness (" +
                        fmt(rep.witness_r1) + ", " + fmt(rep.witness_r2) + ")");
  } else {
    if (!(ni > R && R > nj))
      throw SetupError("counterexample: configuration requires |g_i| > R > |g_j|");

    if (abadi) {
      rep.trace.push_back("all-layer factors: c_i = " + fmt(ci) + " (clipped), c_j = 1 (unclipped)");
      // Sample i pins each of its nonzero groups to R_m = c_i |g_i^(m)|;
      // sample j demands R_m >= |g_j^(m)|. Feasibility is per group.
      bool feasible = true;
      double w1 = 1.0, w2 = 1.0;
      auto solve_group = [&](double nim, double njm, double& w, int m) {
        if (nim > 0.0) {
          w = ci * nim;
          if (njm > 0.0 && w < njm) {
            feasible = false;
            rep.trace.push_back("group " + std::to_string(m) + ": sample i forces R = " + fmt(w) +
                                " but sample j needs R >= " + fmt(njm) + "; infeasible");
          }
        } else {
          w = njm > 0.0 ? njm : 1.0;
        }
      };
      solve_group(ni1, nj1, w1, 1);
      solve_group(ni2, nj2, w2, 2);
      rep.representable = feasible;
      if (feasible) {
        rep.has_witness = true;
        rep.witness_r1 = w1;
        rep.witness_r2 = w2;
        rep.trace.push_back("feasible: witness thresholds (" + fmt(w1) + ", " + fmt(w2) + ")");
      }
      rep.dichotomy_applicable = ni1 > 0.0 && ni1 < nj1;
      if (rep.dichotomy_applicable) {
        rep.trace.push_back("case R1 < " + fmt(nj1) +
                            ": sample j's group 1 gets clipped, all-layer leaves it whole");
        rep.trace.push_back("case R1 >= " + fmt(nj1) + " > " + fmt(ni1) +
                            ": sample i's group 1 stays whole, all-layer scales it by " + fmt(ci));
        rep.trace.push_back("both cases contradict; not representable for any (R1, R2)");
      }
    } else {
      // Matching the normalized forms forces R_m = R (|g^(m)| + gamma) /
      // (|g| + gamma) for every sample with a nonzero group component, so the
      // ratios must agree across samples group by group.
      auto ratio = [&](double nm, double n) { return R * (nm + clip.gamma) / (n + clip.gamma); };
      bool feasible = true;
      double w1 = 1.0, w2 = 1.0;
      auto solve_group = [&](double nim, double njm, double& w, int m) {
        bool use_i = nim > 0.0;
        bool use_j = njm > 0.0;
        double ri = ratio(nim, ni), rj = ratio(njm, nj);
        if (use_i && use_j) {
          if (std::abs(ri - rj) > 1e-12 * std::max(ri, rj)) {
            feasible = false;
            rep.trace.push_back("group " + std::to_string(m) + ": required scales " + fmt(ri) +
                                " vs " + fmt(rj) + " disagree; infeasible");
          }
          w = ri;
        } else if (use_i) {
          w = ri;
        } else if (use_j) {
          w = rj;
        }
      };
      solve_group(ni1, nj1, w1, 1);
      solve_group(ni2, nj2, w2, 2);
      rep.representable = feasible;
      if (feasible) {
        rep.has_witness = true;
        rep.witness_r1 = w1;
        rep.witness_r2 = w2;
        rep.trace.push_back("scales agree: witness (" + fmt(w1) + ", " + fmt(w2) + ")");
      }
    }
  }

  rep.grid_total = static_cast<int>(grid.size());
  for (const auto& [r1, r2] : grid) {
    bool ok = grid_candidate_matches(gi.group1, ni1, r1, abadi, clip.gamma, ci) &&
              grid_candidate_matches(gi.group2, ni2, r2, abadi, clip.gamma, ci) &&
              grid_candidate_matches(gj.group1, nj1, r1, abadi, clip.gamma, cj) &&
              grid_candidate_matches(gj.group2, nj2, r2, abadi, clip.gamma, cj);
    if (ok) ++rep.grid_matches;
  }
  rep.trace.push_back("grid: " + std::to_string(rep.grid_matches) + " of " +
                      std::to_string(rep.grid_total) + " candidates reproduce both samples");
  return rep;
}

namespace {

// Summed weight gradients of the plain (unclipped) batch loss.
std::vector<Tensor> summed_gradients(const Model& model, const Tensor& batch,
                                     const Tensor& targets) {
  ForwardCache cache = forward(model, batch, targets);
  int L = model.arch.num_layers();
  Tensor ones({cache.B});
  for (auto& v : ones.data) v = 1.0;
  std::vector<Tensor> grads(static_cast<size_t>(L));
  Tensor upstream = loss_output_gradient(cache, model.arch.loss);
  for (int l = L - 1; l >= 0; --l) {
    Tensor out_grad = backward_layer(model, cache, l, upstream);
    grads[static_cast<size_t>(l)] =
        clipped_weight_grad(cache.activations[static_cast<size_t>(l)], out_grad, ones);
    if (l > 0) upstream = input_gradient(model, l, out_grad);
  }
  return grads;
}

void sgd_update(Model& model, const std::vector<Tensor>& grads, double eta) {
  for (size_t l = 0; l < grads.size(); ++l)
    for (size_t k = 0; k < grads[l].data.size(); ++k) model.weights[l].data[k] -= eta * grads[l].data[k];
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

constexpr double kTrendTolerance = 0.2;

}  // namespace

double mean_gradient_norm(const Model& model, const Dataset& data) {
  std::vector<Tensor> grads = summed_gradients(model, data.X, data.Y);
  double n = static_cast<double>(data.num_samples());
  double ssq = 0.0;
  for (const auto& g : grads) ssq += frobenius_norm_sq(g);
  return std::sqrt(ssq) / n;
}

ConvergenceSummary convergence_experiment(const Dataset& data, const ArchitectureSpec& arch,
                                          const std::vector<GroupingPlan>& plans,
                                          const std::vector<uint64_t>& seeds,
                                          const ConvergenceOptions& opts) {
  arch.validate();
  if (plans.empty()) throw ConfigError("convergence experiment: need at least one plan");
  if (seeds.empty()) throw ConfigError("convergence experiment: need at least one seed");
  if (opts.T < 1) throw ParameterError("convergence experiment: T must be at least 1");
  if (opts.eval_every < 1) throw ParameterError("convergence experiment: eval cadence must be >= 1");
  int N = data.num_samples();
  if (opts.B < 1 || opts.B > N || N % opts.B != 0)
    throw ConfigError("convergence experiment: batch size must divide the sample count");
  for (const auto& plan : plans) plan.validate(arch.num_layers());

  int np = static_cast<int>(plans.size()), ns = static_cast<int>(seeds.size());
  std::vector<double> mins(static_cast<size_t>(np) * ns, 0.0);
  double eta = opts.lr0 / (opts.B * std::sqrt(static_cast<double>(opts.T)));

  // Exceptions cannot cross the parallel region; record the first failure.
  std::atomic<bool> failed{false};
  std::string fail_msg;
  long long fail_step = 0;

#pragma omp parallel for schedule(dynamic) collapse(2)
  for (int pi = 0; pi < np; ++pi) {
    for (int si = 0; si < ns; ++si) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        RngState root(seeds[static_cast<size_t>(si)]);
        RngState init_rng = root.substream(0);
        // The noise stream does not depend on the plan, so plan comparisons
        // share their noise draws.
        RngState noise_rng = root.substream(1);
        Model model = Model::init(arch, init_rng);
        double minn = mean_gradient_norm(model, data);
        int pos = 0;
        for (int t = 0; t < opts.T; ++t) {
          Tensor xb = take_rows(data.X, pos, opts.B);
          Tensor yb = take_rows(data.Y, pos, opts.B);
          pos = (pos + opts.B) % N;
          StepResult sr = dp_step(model, xb, yb, plans[static_cast<size_t>(pi)], opts.clip,
                                  opts.sigma_dp, noise_rng, false);
          if (!std::isfinite(sr.loss)) {
#pragma omp critical(dpopt_conv_fail)
            if (!failed.load()) {
              fail_msg = "convergence run diverged";
              fail_step = t;
              failed.store(true);
            }
            break;
          }
          sgd_update(model, sr.private_grad.layer_grads, eta);
          if ((t + 1) % opts.eval_every == 0)
            minn = std::min(minn, mean_gradient_norm(model, data));
        }
        mins[static_cast<size_t>(pi) * ns + si] = minn;
      } catch (const std::exception& e) {
#pragma omp critical(dpopt_conv_fail)
        if (!failed.load()) {
          fail_msg = e.what();
          fail_step = -1;
          failed.store(true);
        }
      }
    }
  }
  if (failed.load()) {
    if (fail_step >= 0) throw RunError(fail_msg, fail_step);
    throw Error(fail_msg);
  }

  ConvergenceSummary summary;
  for (int pi = 0; pi < np; ++pi) {
    summary.group_counts.push_back(plans[static_cast<size_t>(pi)].M);
    std::vector<double> per_seed;
    for (int si = 0; si < ns; ++si) {
      double v = mins[static_cast<size_t>(pi) * ns + si];
      per_seed.push_back(v);
      summary.runs.push_back({plans[static_cast<size_t>(pi)].M, seeds[static_cast<size_t>(si)], v});
    }
    summary.medians.push_back(median_of(per_seed));
  }
  summary.trend_nondecreasing = true;
  for (size_t k = 0; k + 1 < summary.medians.size(); ++k)
    if (summary.medians[k + 1] < (1.0 - kTrendTolerance) * summary.medians[k])
      summary.trend_nondecreasing = false;
  return summary;
}

BaselineResult nondp_baseline(const Dataset& data, const ArchitectureSpec& arch,
                              const std::vector<int>& T_values, int B, double lr0,
                              const std::vector<uint64_t>& seeds) {
  arch.validate();
  if (T_values.empty()) throw ConfigError("baseline: need at least one horizon");
  if (seeds.empty()) throw ConfigError("baseline: need at least one seed");
  int N = data.num_samples();
  if (B < 1 || B > N || N % B != 0)
    throw ConfigError("baseline: batch size must divide the sample count");

  int nt = static_cast<int>(T_values.size()), ns = static_cast<int>(seeds.size());
  std::vector<double> mins(static_cast<size_t>(nt) * ns, 0.0);
  std::atomic<bool> failed{false};
  std::string fail_msg;

#pragma omp parallel for schedule(dynamic) collapse(2)
  for (int ti = 0; ti < nt; ++ti) {
    for (int si = 0; si < ns; ++si) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        int T = T_values[static_cast<size_t>(ti)];
        RngState init_rng = RngState(seeds[static_cast<size_t>(si)]).substream(0);
        Model model = Model::init(arch, init_rng);
        double eta = lr0 / (B * std::sqrt(static_cast<double>(T)));
        int every = std::max(1, T / 200);
        double minn = mean_gradient_norm(model, data);
        int pos = 0;
        for (int t = 0; t < T; ++t) {
          Tensor xb = take_rows(data.X, pos, B);
          Tensor yb = take_rows(data.Y, pos, B);
          pos = (pos + B) % N;
          sgd_update(model, summed_gradients(model, xb, yb), eta);
          if ((t + 1) % every == 0) minn = std::min(minn, mean_gradient_norm(model, data));
        }
        mins[static_cast<size_t>(ti) * ns + si] = minn;
      } catch (const std::exception& e) {
#pragma omp critical(dpopt_base_fail)
        if (!failed.load()) {
          fail_msg = e.what();
          failed.store(true);
        }
      }
    }
  }
  if (failed.load()) throw Error(fail_msg);

  BaselineResult out;
  out.T_values = T_values;
  for (int ti = 0; ti < nt; ++ti) {
    std::vector<double> per_seed(mins.begin() + static_cast<int64_t>(ti) * ns,
                                 mins.begin() + static_cast<int64_t>(ti + 1) * ns);
    out.medians.push_back(median_of(per_seed));
  }

  double mx = 0.0, my = 0.0;
  int n = nt;
  std::vector<double> xs, ys;
  for (int i = 0; i < n; ++i) {
    xs.push_back(std::log10(static_cast<double>(out.T_values[static_cast<size_t>(i)])));
    ys.push_back(std::log10(std::max(out.medians[static_cast<size_t>(i)], 1e-300)));
    mx += xs.back();
    my += ys.back();
  }
  mx /= n;
  my /= n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += (xs[static_cast<size_t>(i)] - mx) * (ys[static_cast<size_t>(i)] - my);
    den += (xs[static_cast<size_t>(i)] - mx) * (xs[static_cast<size_t>(i)] - mx);
  }
  out.slope = den > 0.0 ? num / den : 0.0;
  return out;
}

double proof_eta0(double initial_loss, const TheoryParams& p, double sigma_dp, int64_t dim, int B) {
  p.validate();
  if (sigma_dp < 0.0) throw ParameterError("proof_eta0: sigma must be nonnegative");
  if (B < 1) throw ParameterError("proof_eta0: batch size must be positive");
  if (dim < 1) throw ParameterError("proof_eta0: dimension must be positive");
  double gap = initial_loss - p.loss_floor;
  if (!(gap > 0.0)) throw ParameterError("proof_eta0: initial loss must exceed the loss floor");
  double bb = static_cast<double>(B) * B;
  return std::sqrt(2.0 * gap /
                   (p.smoothness * (1.0 + sigma_dp * sigma_dp * static_cast<double>(dim) / bb)));
}

double quadratic_smoothness(const Dataset& data) {
  if (data.loss != Loss::MeanSquaredError || data.Y.rank() != 3)
    throw ParameterError("quadratic smoothness: needs a mean-squared-error dataset");
  int N = data.num_samples(), D = data.feature_dim(), P = data.Y.dim(2);
  Tensor flat = data.X;
  flat.shape = {N, D};
  Tensor gram = matmul_tn(flat, flat);  // [D, D]

  Tensor v({D});
  for (auto& x : v.data) x = 1.0 / std::sqrt(static_cast<double>(D));
  double lambda = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    Tensor w({D});
    for (int i = 0; i < D; ++i) {
      double acc = 0.0;
      for (int j = 0; j < D; ++j)
        acc += gram.data[static_cast<size_t>(i) * D + j] * v.data[static_cast<size_t>(j)];
      w.data[static_cast<size_t>(i)] = acc;
    }
    double nn = std::sqrt(frobenius_norm_sq(w));
    if (nn == 0.0) return 0.0;
    lambda = 0.0;
    for (int i = 0; i < D; ++i) lambda += v.data[static_cast<size_t>(i)] * w.data[static_cast<size_t>(i)];
    for (int i = 0; i < D; ++i) v.data[static_cast<size_t>(i)] = w.data[static_cast<size_t>(i)] / nn;
  }
  return 2.0 * lambda / (static_cast<double>(N) * P);
}

}  // namespace dpopt
