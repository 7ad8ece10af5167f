// bco-lab: experiment driver for one-dimensional bandit convex optimization.
//
// Subcommands:
//   run-bayes     modified Thompson Sampling episodes against a finite prior
//   run-exp3      Exp3 over a geometric or uniform grid vs an oblivious adversary
//   run-fullinfo  Doob-martingale strategy on the simplex, exact enumeration
//   info-ratio    per-round information diagnostics and the variation bound
//   verify-lemma  randomized / live-run inequality checks, CSV per instance
//   accept        the full acceptance suite (one pass/fail line per criterion)
//
// Exit status is nonzero iff any hard invariant failed.

#include <CLI11.hpp>

#include <cstdio>
#include <set>
#include <string>

#include "bcolab/acceptance.hpp"
#include "bcolab/experiment.hpp"

namespace {

void add_common(CLI::App* cmd, bcolab::ExperimentConfig& cfg, std::string& config_file) {
  cmd->add_option("--seed", cfg.seed, "master seed");
  cmd->add_option("--out", cfg.out, "output directory");
  cmd->add_option("--threads", cfg.threads, "replica-level worker threads");
  cmd->add_option("--config", config_file, "flat key=value config file");
}

int finish(const bcolab::RegretReport& report) {
  std::printf("mean=%.6g stderr=%.6g bound=%.6g checks=%ld failures=%ld (%.2fs)\n",
              report.mean, report.stderr_mean, report.bound, report.invariant_checks,
              report.invariant_failures, report.runtime_seconds);
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bandit convex optimization lab"};
  app.require_subcommand(1);

  bcolab::ExperimentConfig cfg;
  cfg.threads = bcolab::env_threads_default();
  std::string config_file;
  std::string eps_arg = "auto";

  auto* bayes = app.add_subcommand("run-bayes", "modified Thompson Sampling episodes");
  bayes->add_option("--prior", cfg.prior, "named prior or scenario directory");
  bayes->add_option("--T", cfg.T, "horizon");
  bayes->add_option("--eps", eps_arg, "tolerance parameter, or auto = 1/sqrt(T)");
  bayes->add_option("--replicas", cfg.replicas, "independent episodes");
  bayes->add_option("--M", cfg.M, "scenarios for generated priors");
  bayes->add_flag("--no-lemma-checks", "skip per-round lemma checks");
  add_common(bayes, cfg, config_file);

  auto* exp3 = app.add_subcommand("run-exp3", "Exp3 over a grid of [0,1]");
  exp3->add_option("--adversary", cfg.adversary, "constant | static-valley | needle");
  exp3->add_option("--T", cfg.T, "horizon");
  exp3->add_option("--grid", cfg.grid, "geometric | uniform");
  exp3->add_option("--eps", eps_arg, "grid parameter, or auto = T^(-1/3)");
  exp3->add_option("--replicas", cfg.replicas, "independent runs");
  add_common(exp3, cfg, config_file);

  auto* fullinfo = app.add_subcommand("run-fullinfo", "full-information simplex strategy");
  fullinfo->add_option("--n", cfg.n, "simplex dimension");
  fullinfo->add_option("--T", cfg.T, "horizon (exact mode caps at 50)");
  fullinfo->add_option("--prior", cfg.prior, "pooled | static");
  fullinfo->add_option("--M", cfg.M, "scenarios");
  fullinfo->add_option("--mode", cfg.mode, "exact | mc");
  add_common(fullinfo, cfg, config_file);

  auto* info = app.add_subcommand("info-ratio", "information diagnostics per round");
  info->add_option("--prior", cfg.prior, "named prior or scenario directory");
  info->add_option("--T", cfg.T, "horizon");
  info->add_option("--eps", eps_arg, "tolerance parameter, or auto");
  info->add_option("--replicas", cfg.replicas, "independent episodes");
  info->add_option("--M", cfg.M, "scenarios for generated priors");
  add_common(info, cfg, config_file);

  auto* lemma = app.add_subcommand("verify-lemma", "inequality verification sweeps");
  lemma->add_option("--which", cfg.which, "loc2glob | l2bound | logsum | discretize");
  lemma->add_option("--trials", cfg.trials, "instances to generate");
  add_common(lemma, cfg, config_file);

  auto* accept = app.add_subcommand("accept", "run the acceptance suite");
  add_common(accept, cfg, config_file);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_file.empty()) {
      // Flags given on the command line beat file values.
      std::set<std::string> cli_set;
      for (CLI::App* cmd : app.get_subcommands()) {
        for (const CLI::Option* opt : cmd->get_options()) {
          if (opt->count() == 0) continue;
          std::string name = opt->get_name();
          while (!name.empty() && name.front() == '-') name.erase(name.begin());
          cli_set.insert(name);
        }
      }
      cli_set.insert("kind");
      bcolab::apply_config_file(cfg, config_file, cli_set);
    }
    if (eps_arg != "auto") cfg.eps = std::stod(eps_arg);

    if (bayes->parsed()) {
      cfg.kind = "run-bayes";
      cfg.lemma_checks = bayes->count("--no-lemma-checks") == 0 && cfg.lemma_checks;
      auto run = bcolab::run_bayes_experiment(cfg, /*full_pinsker=*/false);
      bcolab::emit_bayes_csv(run, cfg);
      return finish(run.report);
    }
    if (exp3->parsed()) {
      cfg.kind = "run-exp3";
      auto run = bcolab::run_exp3_experiment(cfg);
      bcolab::emit_exp3_csv(run, cfg);
      return finish(run.report);
    }
    if (fullinfo->parsed()) {
      cfg.kind = "run-fullinfo";
      if (cfg.prior == "iid-vee") cfg.prior = "pooled";
      auto run = bcolab::run_fullinfo_experiment(cfg);
      bcolab::emit_fullinfo_csv(run, cfg);
      std::printf("total_variation=%.6g neyman_bound=%.6g regret=%.6g martingale=%s mode=%s\n",
                  run.result.total_variation, run.result.neyman_bound,
                  run.result.cum_regret, run.result.martingale_ok ? "ok" : "VIOLATED",
                  run.result.exact ? "exact" : "mc");
      return finish(run.report);
    }
    if (info->parsed()) {
      cfg.kind = "info-ratio";
      auto run = bcolab::run_bayes_experiment(cfg, /*full_pinsker=*/true);
      bcolab::emit_info_csv(run, cfg);
      std::printf("variation_lhs=%.6g variation_bound=%.6g pinsker=%s\n", run.gain_lhs,
                  run.gain_bound, run.pinsker_all_ok ? "ok" : "VIOLATED");
      return finish(run.report);
    }
    if (lemma->parsed()) {
      cfg.kind = "verify-lemma";
      auto run = bcolab::run_lemma_experiment(cfg);
      std::printf("rows=%ld worst_margin=%.6g\n", run.rows, run.worst_margin);
      return finish(run.report);
    }
    if (accept->parsed()) {
      auto results = bcolab::run_acceptance(cfg.out, cfg.threads, cfg.seed);
      bool all = true;
      for (const auto& r : results) all = all && r.pass;
      std::printf("%s: %zu criteria\n", all ? "ACCEPTED" : "REJECTED", results.size());
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
