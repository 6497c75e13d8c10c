// Copyright 2026 betanmf contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "betanmf/io.hpp"
#include "betanmf/solver.hpp"
#include "betanmf/synthetic.hpp"

namespace betanmf {

// Run configuration shared by the CLI verbs. Serializes to/from JSON
// (--config); synthetic and file inputs are mutually exclusive.

struct SyntheticInput {
  Eigen::Index F = 10;
  Eigen::Index N = 25;
  Eigen::Index K_true = 5;
  unsigned long long seed = 0;
};

struct RunConfig {
  std::optional<SyntheticInput> synthetic;
  std::optional<std::string> input_file;

  Eigen::Index rank = 5;
  double beta = 1.0;
  std::vector<std::string> rules = {"mm"};  // tokens: mm | heur | me
  double theta = 0.95;
  std::optional<double> theta_end;
  long max_iter = 100;
  unsigned long long seed = 0;  // initialization seed, shared across a sweep
  double l1_weight = 0.0;

  std::optional<double> mask_fraction;  // random mask: missing probability
  unsigned long long mask_seed = 0;
  std::optional<std::string> mask_file;

  std::optional<std::string> convex_s_file;
  long checkpoint_every = 10;
  std::string output_dir = ".";
  double threshold = 1e-8;  // iterations-to-threshold cost level
  std::optional<double> tol;
  double eps_floor = kDefaultEpsFloor;
  bool update_w = true;
  std::optional<double> peak;  // PSNR peak value; defaults to max of the data
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json::object();
  if (c.synthetic) {
    j["input"]["synthetic"] = {{"F", c.synthetic->F},
                               {"N", c.synthetic->N},
                               {"K_true", c.synthetic->K_true},
                               {"seed", c.synthetic->seed}};
  } else if (c.input_file) {
    j["input"]["file"] = *c.input_file;
  }
  j["rank"] = c.rank;
  j["beta"] = c.beta;
  j["rules"] = c.rules;
  j["theta"] = c.theta;
  if (c.theta_end) j["theta_end"] = *c.theta_end;
  j["max_iter"] = c.max_iter;
  j["seed"] = c.seed;
  j["l1_weight"] = c.l1_weight;
  if (c.mask_fraction)
    j["mask"]["random_fraction"] = {{"p", *c.mask_fraction}, {"seed", c.mask_seed}};
  else if (c.mask_file)
    j["mask"]["file"] = *c.mask_file;
  if (c.convex_s_file) j["convex_s"] = *c.convex_s_file;
  j["checkpoint_every"] = c.checkpoint_every;
  j["output_dir"] = c.output_dir;
  j["threshold"] = c.threshold;
  if (c.tol) j["tol"] = *c.tol;
  j["eps_floor"] = c.eps_floor;
  j["update_w"] = c.update_w;
  if (c.peak) j["peak"] = *c.peak;
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  c = RunConfig{};
  if (j.contains("input")) {
    const auto& in = j.at("input");
    if (in.contains("synthetic")) {
      const auto& s = in.at("synthetic");
      c.synthetic = SyntheticInput{s.at("F").get<Eigen::Index>(), s.at("N").get<Eigen::Index>(),
                                   s.at("K_true").get<Eigen::Index>(),
                                   s.at("seed").get<unsigned long long>()};
    } else if (in.contains("file")) {
      c.input_file = in.at("file").get<std::string>();
    }
  }
  if (j.contains("rank")) c.rank = j.at("rank").get<Eigen::Index>();
  if (j.contains("beta")) c.beta = j.at("beta").get<double>();
  if (j.contains("rules")) c.rules = j.at("rules").get<std::vector<std::string>>();
  if (j.contains("theta")) c.theta = j.at("theta").get<double>();
  if (j.contains("theta_end")) c.theta_end = j.at("theta_end").get<double>();
  if (j.contains("max_iter")) c.max_iter = j.at("max_iter").get<long>();
  if (j.contains("seed")) c.seed = j.at("seed").get<unsigned long long>();
  if (j.contains("l1_weight")) c.l1_weight = j.at("l1_weight").get<double>();
  if (j.contains("mask")) {
    const auto& m = j.at("mask");
    if (m.contains("random_fraction")) {
      c.mask_fraction = m.at("random_fraction").at("p").get<double>();
      c.mask_seed = m.at("random_fraction").at("seed").get<unsigned long long>();
    } else if (m.contains("file")) {
      c.mask_file = m.at("file").get<std::string>();
    }
  }
  if (j.contains("convex_s")) c.convex_s_file = j.at("convex_s").get<std::string>();
  if (j.contains("checkpoint_every")) c.checkpoint_every = j.at("checkpoint_every").get<long>();
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("threshold")) c.threshold = j.at("threshold").get<double>();
  if (j.contains("tol")) c.tol = j.at("tol").get<double>();
  if (j.contains("eps_floor")) c.eps_floor = j.at("eps_floor").get<double>();
  if (j.contains("update_w")) c.update_w = j.at("update_w").get<bool>();
  if (j.contains("peak")) c.peak = j.at("peak").get<double>();
}

inline UpdateRule make_rule(const std::string& token, const BetaParams& p, double theta,
                            std::optional<double> theta_end) {
  if (token == "mm") return UpdateRule::mm();
  if (token == "heur") return UpdateRule::heuristic();
  if (token == "me") return UpdateRule::me(p, theta, theta_end);
  throw std::invalid_argument("unknown rule '" + token + "' (expected mm | heur | me)");
}

inline std::string format_beta(double beta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", beta);
  return buf;
}

namespace detail {

struct ResolvedInput {
  Matrix V;
  std::optional<Matrix> W_star;
  std::optional<Matrix> H_star;
};

inline ResolvedInput resolve_input(const RunConfig& c) {
  require(!(c.synthetic && c.input_file), "synthetic and file inputs are mutually exclusive");
  if (c.input_file) return {load_matrix(*c.input_file), {}, {}};
  const SyntheticInput s = c.synthetic.value_or(SyntheticInput{});
  SyntheticProblem prob = gen_synthetic(s.F, s.N, s.K_true, s.seed);
  return {std::move(prob.V), std::move(prob.W_star), std::move(prob.H_star)};
}

inline std::optional<Matrix> resolve_mask(const RunConfig& c, Eigen::Index F, Eigen::Index N) {
  require(!(c.mask_fraction && c.mask_file), "mask fraction and mask file are mutually exclusive");
  if (c.mask_fraction) return mask_gen(F, N, *c.mask_fraction, c.mask_seed);
  if (c.mask_file) return load_matrix(*c.mask_file);
  return {};
}

inline ProblemSpec build_spec(const RunConfig& c, Matrix V, const UpdateRule& rule,
                              const std::optional<Matrix>& mask,
                              const std::optional<Matrix>& S) {
  ProblemSpec spec(std::move(V), c.rank, BetaParams(c.beta), rule);
  spec.l1_weight = c.l1_weight;
  spec.max_iter = c.max_iter;
  spec.seed = c.seed;
  spec.tol = c.tol;
  spec.eps_floor = c.eps_floor;
  spec.checkpoint_every = c.checkpoint_every;
  spec.update_w = c.update_w;
  spec.mask = mask;
  spec.convex_s = S;
  return spec;
}

inline long iters_to_threshold(const RunTrace& trace, double threshold) {
  for (const TraceRecord& r : trace.records)
    if (r.cost < threshold) return r.iter;
  return -1;
}

inline double total_wall_s(const RunTrace& trace) {
  double ms = 0.0;
  for (const TraceRecord& r : trace.records) ms += r.wall_ms;
  return ms / 1000.0;
}

inline nlohmann::json summary_entry(const RunConfig& c, const RunTrace& trace) {
  nlohmann::json e;
  e["rule"] = trace.rule;
  e["beta"] = trace.beta;
  e["final_cost"] = trace.back().cost;
  e["final_kkt_w"] = trace.back().kkt_w;
  e["final_kkt_h"] = trace.back().kkt_h;
  e["iters_to_threshold"] = iters_to_threshold(trace, c.threshold);
  e["threshold"] = c.threshold;
  e["wall_s"] = total_wall_s(trace);
  e["seed"] = trace.seed;
  if (trace.error) e["error"] = *trace.error;
  if (!trace.warnings.empty()) e["warnings"] = trace.warnings;
  return e;
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace detail

// Run every rule of the sweep from one shared initialization, writing
// <rule>_<beta>.csv traces and a summary.json into output_dir. Returns 0 on
// success; partial traces are flushed when a run aborts.
inline int bench(const RunConfig& config, std::ostream& log = std::cout) {
  namespace fs = std::filesystem;
  require(!config.rules.empty(), "bench: at least one rule is required");
  const BetaParams p(config.beta);
  detail::ResolvedInput input = detail::resolve_input(config);
  const Eigen::Index F = input.V.rows(), N = input.V.cols();
  const std::optional<Matrix> mask = detail::resolve_mask(config, F, N);
  std::optional<Matrix> S;
  if (config.convex_s_file) S = load_matrix(*config.convex_s_file);

  fs::create_directories(config.output_dir);

  // shared initialization isolates the update rule within the sweep
  const Eigen::Index left_rows = S ? S->cols() : F;
  SeededRng rng(config.seed);
  FactorState init;
  init.W = rng.uniform_matrix(left_rows, config.rank, 0.1, 1.1);
  init.H = rng.uniform_matrix(config.rank, N, 0.1, 1.1);

  nlohmann::json summary = nlohmann::json::array();
  int status = 0;
  for (const std::string& token : config.rules) {
    const UpdateRule rule = make_rule(token, p, config.theta, config.theta_end);
    ProblemSpec spec = detail::build_spec(config, input.V, rule, mask, S);
    RunResult result = run(spec, init);
    const std::string trace_path =
        (fs::path(config.output_dir) / (token + "_" + format_beta(config.beta) + ".csv")).string();
    write_trace_csv(result.trace, trace_path);
    summary.push_back(detail::summary_entry(config, result.trace));
    log << token << " beta=" << format_beta(config.beta)
        << " final_cost=" << result.trace.back().cost
        << " iters_to_threshold=" << detail::iters_to_threshold(result.trace, config.threshold)
        << (result.trace.ok() ? "" : "  [aborted: " + *result.trace.error + "]") << '\n';
    if (!result.trace.ok()) status = 1;
  }
  detail::write_json(summary, (fs::path(config.output_dir) / "summary.json").string());
  return status;
}

// Single-rule factorization; writes W.csv (L.csv for convex runs), H.csv, the
// trace, and summary.json.
inline int factorize(const RunConfig& config, std::ostream& log = std::cout) {
  namespace fs = std::filesystem;
  require(config.rules.size() == 1, "factorize: exactly one rule is required");
  const BetaParams p(config.beta);
  detail::ResolvedInput input = detail::resolve_input(config);
  const std::optional<Matrix> mask = detail::resolve_mask(config, input.V.rows(), input.V.cols());
  std::optional<Matrix> S;
  if (config.convex_s_file) S = load_matrix(*config.convex_s_file);

  fs::create_directories(config.output_dir);
  const UpdateRule rule = make_rule(config.rules[0], p, config.theta, config.theta_end);
  ProblemSpec spec = detail::build_spec(config, input.V, rule, mask, S);
  RunResult result = run(spec);

  const fs::path out(config.output_dir);
  save_matrix(result.state.W, (out / (S ? "L.csv" : "W.csv")).string());
  save_matrix(result.state.H, (out / "H.csv").string());
  const std::string trace_path =
      (out / (config.rules[0] + "_" + format_beta(config.beta) + ".csv")).string();
  write_trace_csv(result.trace, trace_path);
  nlohmann::json summary = nlohmann::json::array({detail::summary_entry(config, result.trace)});
  detail::write_json(summary, (out / "summary.json").string());
  log << "final_cost=" << result.trace.back().cost << " kkt_w=" << result.trace.back().kkt_w
      << " kkt_h=" << result.trace.back().kkt_h << '\n';
  return result.trace.ok() ? 0 : 1;
}

// Missing-data protocol: mask the data, factorize from the observed entries
// only, and report reconstruction quality (per-column PSNR against the
// original, held-out divergence before/after).
inline int interpolate(const RunConfig& config, std::ostream& log = std::cout) {
  namespace fs = std::filesystem;
  require(config.rules.size() == 1, "interpolate: exactly one rule is required");
  require(config.mask_fraction.has_value() || config.mask_file.has_value(),
          "interpolate: a mask (fraction or file) is required");
  const BetaParams p(config.beta);
  detail::ResolvedInput input = detail::resolve_input(config);
  const Eigen::Index F = input.V.rows(), N = input.V.cols();
  const std::optional<Matrix> mask = detail::resolve_mask(config, F, N);
  const Matrix held_out = Matrix::Ones(F, N) - *mask;

  fs::create_directories(config.output_dir);
  const UpdateRule rule = make_rule(config.rules[0], p, config.theta, config.theta_end);
  ProblemSpec spec = detail::build_spec(config, input.V, rule, mask, {});

  SeededRng rng(config.seed);
  FactorState init;
  init.W = rng.uniform_matrix(F, config.rank, 0.1, 1.1);
  init.H = rng.uniform_matrix(config.rank, N, 0.1, 1.1);

  const long held_count = observed_count(F, N, &held_out);
  const double held_init =
      held_count == 0 ? 0.0
                      : cost(input.V, init.W, init.H, p, &held_out, config.eps_floor) /
                            static_cast<double>(held_count);

  RunResult result = run(spec, init);
  const Matrix recon = result.state.W * result.state.H;
  const double held_final =
      held_count == 0 ? 0.0
                      : cost(input.V, result.state.W, result.state.H, p, &held_out,
                             config.eps_floor) /
                            static_cast<double>(held_count);

  const double peak = config.peak.value_or(input.V.maxCoeff());
  std::vector<double> psnrs(static_cast<size_t>(N));
  for (Eigen::Index n = 0; n < N; ++n)
    psnrs[static_cast<size_t>(n)] = psnr(input.V.col(n), recon.col(n), peak);
  std::vector<double> sorted = psnrs;
  std::sort(sorted.begin(), sorted.end());
  const double psnr_min = sorted.front();
  const double psnr_median = sorted[sorted.size() / 2];
  const double psnr_mean =
      std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());

  const fs::path out(config.output_dir);
  save_matrix(recon, (out / "reconstruction.csv").string());
  save_matrix(*mask, (out / "mask.csv").string());
  write_trace_csv(result.trace,
                  (out / (config.rules[0] + "_" + format_beta(config.beta) + ".csv")).string());

  nlohmann::json report;
  report["rule"] = config.rules[0];
  report["beta"] = config.beta;
  report["rank"] = config.rank;
  report["peak"] = peak;
  report["missing_fraction_realized"] = betanmf::missing_fraction(*mask);
  report["psnr_mean"] = psnr_mean;
  report["psnr_min"] = psnr_min;
  report["psnr_median"] = psnr_median;
  report["heldout_cost_init"] = held_init;
  report["heldout_cost_final"] = held_final;
  report["observed_cost_final"] = result.trace.back().cost;
  report["seed"] = config.seed;
  detail::write_json(report, (out / "interp_report.json").string());
  log << "psnr_mean=" << psnr_mean << " heldout_init=" << held_init
      << " heldout_final=" << held_final << '\n';
  return result.trace.ok() ? 0 : 1;
}

// Write a synthetic problem (V and its ground-truth factors) to output_dir.
inline int gen(const RunConfig& config, std::ostream& log = std::cout) {
  namespace fs = std::filesystem;
  require(config.synthetic.has_value(), "gen: synthetic input parameters are required");
  const SyntheticInput s = *config.synthetic;
  SyntheticProblem prob = gen_synthetic(s.F, s.N, s.K_true, s.seed);
  fs::create_directories(config.output_dir);
  const fs::path out(config.output_dir);
  save_matrix(prob.V, (out / "V.csv").string());
  save_matrix(prob.W_star, (out / "W_star.csv").string());
  save_matrix(prob.H_star, (out / "H_star.csv").string());
  log << "wrote " << s.F << "x" << s.N << " synthetic problem (rank " << s.K_true << ") to "
      << config.output_dir << '\n';
  return 0;
}

}  // namespace betanmf
