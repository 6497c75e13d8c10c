// Copyright 2026 betanmf contributors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line harness around the betanmf library.
//
//   betanmf bench        algorithm sweep from a shared initialization,
//                        exporting per-rule convergence traces and a summary
//   betanmf factorize    single factorization, exporting factors and trace
//   betanmf interpolate  masked factorization + reconstruction report
//   betanmf gen          write a synthetic problem to disk

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "betanmf/betanmf.hpp"

namespace {

struct CliOptions {
  betanmf::RunConfig config;
  std::string config_file;
  // synthetic input staging (merged into config when any is set)
  long synth_f = 10, synth_n = 25, synth_k = 5;
  unsigned long long data_seed = 0;
  bool use_synth = false;
  std::string input_file;
  std::string mask_file;
  double mask_frac = -1.0;
  unsigned long long mask_seed = 0;
  std::string convex_s;
  double theta_end = -1.0;
  double tol = -1.0;
  double peak = -1.0;
  bool fixed_w = false;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_file, "JSON run configuration (flags override)");
  cmd->add_option("--beta", opt.config.beta, "divergence shape parameter");
  cmd->add_option("--rank,-k", opt.config.rank, "factorization rank K");
  cmd->add_option("--rule", opt.config.rules, "update rule (mm | heur | me); repeatable")
      ->delimiter(',');
  cmd->add_option("--theta", opt.config.theta, "ME mixture weight in [0,1)");
  cmd->add_option("--theta-end", opt.theta_end, "linear theta schedule end value");
  cmd->add_option("--iters", opt.config.max_iter, "number of iterations");
  cmd->add_option("--seed", opt.config.seed, "initialization seed");
  cmd->add_option("--l1", opt.config.l1_weight, "l1 penalty weight on H (MM rule)");
  cmd->add_option("--mask-frac", opt.mask_frac, "random missing-entry fraction in [0,1]");
  cmd->add_option("--mask-seed", opt.mask_seed, "mask generation seed");
  cmd->add_option("--mask-file", opt.mask_file, "binary mask CSV (0 = missing)");
  cmd->add_option("--convex-s", opt.convex_s, "fixed basis S for convex factorization (CSV)");
  cmd->add_option("--out", opt.config.output_dir, "output directory");
  cmd->add_option("--input", opt.input_file, "data matrix CSV");
  cmd->add_option("--F", opt.synth_f, "synthetic data rows");
  cmd->add_option("--N", opt.synth_n, "synthetic data columns");
  cmd->add_option("--K-true", opt.synth_k, "synthetic ground-truth rank");
  cmd->add_option("--data-seed", opt.data_seed, "synthetic data seed");
  cmd->add_option("--threshold", opt.config.threshold,
                  "normalized-cost level for iterations-to-threshold");
  cmd->add_option("--tol", opt.tol, "stop when the relative cost change falls below this");
  cmd->add_option("--checkpoint-every", opt.config.checkpoint_every,
                  "fit-residual checkpoint stride (0 = off)");
  cmd->add_option("--peak", opt.peak, "PSNR peak value (interpolate)");
  cmd->add_flag("--fixed-w", opt.fixed_w, "hold the left factor fixed, update H only");
}

betanmf::RunConfig finalize(const CLI::App* cmd, CliOptions& opt) {
  betanmf::RunConfig config;
  if (!opt.config_file.empty()) {
    std::ifstream in(opt.config_file);
    betanmf::require(in.good(), "cannot open config file: " + opt.config_file);
    nlohmann::json j;
    in >> j;
    config = j.get<betanmf::RunConfig>();
  }

  auto given = [&](const std::string& name) { return cmd->count(name) > 0; };
  if (given("--beta")) config.beta = opt.config.beta;
  if (given("--rank")) config.rank = opt.config.rank;
  if (given("--rule")) config.rules = opt.config.rules;
  if (given("--theta")) config.theta = opt.config.theta;
  if (given("--theta-end")) config.theta_end = opt.theta_end;
  if (given("--iters")) config.max_iter = opt.config.max_iter;
  if (given("--seed")) config.seed = opt.config.seed;
  if (given("--l1")) config.l1_weight = opt.config.l1_weight;
  if (given("--out")) config.output_dir = opt.config.output_dir;
  if (given("--threshold")) config.threshold = opt.config.threshold;
  if (given("--checkpoint-every")) config.checkpoint_every = opt.config.checkpoint_every;
  if (given("--tol")) config.tol = opt.tol;
  if (given("--peak")) config.peak = opt.peak;
  if (given("--mask-frac")) {
    config.mask_fraction = opt.mask_frac;
    config.mask_seed = opt.mask_seed;
  }
  if (given("--mask-seed")) config.mask_seed = opt.mask_seed;
  if (given("--mask-file")) config.mask_file = opt.mask_file;
  if (given("--convex-s")) config.convex_s_file = opt.convex_s;
  if (given("--input")) {
    config.input_file = opt.input_file;
    config.synthetic.reset();
  } else if (given("--F") || given("--N") || given("--K-true") || given("--data-seed") ||
             (!config.input_file && !config.synthetic)) {
    config.synthetic =
        betanmf::SyntheticInput{opt.synth_f, opt.synth_n, opt.synth_k, opt.data_seed};
  }
  if (given("--fixed-w")) config.update_w = !opt.fixed_w;

  if (const char* env = std::getenv("BETA_NMF_EPS_FLOOR")) {
    config.eps_floor = std::strtod(env, nullptr);
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"beta-divergence NMF: multiplicative, MM and ME update rules"};
  app.require_subcommand(1);

  CliOptions opt;
  CLI::App* cmd_bench = app.add_subcommand("bench", "sweep update rules, export traces");
  CLI::App* cmd_fact = app.add_subcommand("factorize", "run one factorization");
  CLI::App* cmd_interp = app.add_subcommand("interpolate", "masked run + reconstruction report");
  CLI::App* cmd_gen = app.add_subcommand("gen", "write a synthetic problem to disk");
  for (CLI::App* cmd : {cmd_bench, cmd_fact, cmd_interp, cmd_gen}) add_common_flags(cmd, opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_bench->parsed()) return betanmf::bench(finalize(cmd_bench, opt));
    if (cmd_fact->parsed()) return betanmf::factorize(finalize(cmd_fact, opt));
    if (cmd_interp->parsed()) return betanmf::interpolate(finalize(cmd_interp, opt));
    if (cmd_gen->parsed()) return betanmf::gen(finalize(cmd_gen, opt));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
