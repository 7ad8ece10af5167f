#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bcolab/bayes_algo.hpp"
#include "bcolab/csv.hpp"
#include "bcolab/exp3.hpp"
#include "bcolab/fullinfo.hpp"
#include "bcolab/info_metrics.hpp"
#include "bcolab/lemma_lab.hpp"
#include "bcolab/prior.hpp"

namespace bcolab {

struct ExperimentConfig {
  std::string kind;  // run-bayes, run-exp3, run-fullinfo, info-ratio, verify-lemma
  std::string prior = "iid-vee";       // named generator or a prior directory
  std::string adversary = "static-valley";
  std::string which = "loc2glob";      // verify-lemma target
  std::string grid = "geometric";
  std::string mode = "exact";
  int T = 100;
  double eps = 0.0;  // <= 0 means the experiment's auto rule
  int replicas = 1;
  int n = 3;         // simplex dimension
  long trials = 10000;
  int M = 200;       // scenarios for generated priors
  std::uint64_t seed = 1;
  std::string out = "out";
  int threads = 1;
  bool lemma_checks = true;

  double resolved_eps() const {
    if (eps > 0.0) return eps;
    if (kind == "run-exp3") return std::pow(double(T), -1.0 / 3.0);
    return 1.0 / std::sqrt(double(T));
  }
};

// Flat key=value config file; '#' starts a comment. CLI flags override
// file values, the file overrides defaults: keys in `cli_set` were given
// explicitly on the command line and are left untouched.
inline void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path,
                              const std::set<std::string>& cli_set = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    if (cli_set.count(key)) continue;
    if (key == "kind") cfg.kind = val;
    else if (key == "prior") cfg.prior = val;
    else if (key == "adversary") cfg.adversary = val;
    else if (key == "which") cfg.which = val;
    else if (key == "grid") cfg.grid = val;
    else if (key == "mode") cfg.mode = val;
    else if (key == "T") cfg.T = std::stoi(val);
    else if (key == "eps") cfg.eps = (val == "auto" ? 0.0 : std::stod(val));
    else if (key == "replicas") cfg.replicas = std::stoi(val);
    else if (key == "n") cfg.n = std::stoi(val);
    else if (key == "trials") cfg.trials = std::stol(val);
    else if (key == "M") cfg.M = std::stoi(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "out") cfg.out = val;
    else if (key == "threads") cfg.threads = std::stoi(val);
    else if (key == "lemma_checks") cfg.lemma_checks = (val == "1" || val == "on" || val == "true");
    else throw std::runtime_error("unknown config key: " + key);
  }
}

inline int env_threads_default() {
  if (const char* env = std::getenv("BCO_LAB_THREADS")) {
    int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return 1;
}

// Replica-level parallelism; slot i of every output belongs to replica i,
// so results are identical at any thread count. The first exception raised
// in a worker is rethrown on the calling thread.
template <typename F>
inline void parallel_replicas(int n, int threads, F&& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct RegretReport {
  std::vector<double> replica_regret;
  double mean = 0.0;
  double stderr_mean = 0.0;
  double bound = 0.0;
  long invariant_checks = 0;
  long invariant_failures = 0;
  double runtime_seconds = 0.0;

  void finalize() {
    if (replica_regret.empty()) return;
    double s = 0.0;
    for (double r : replica_regret) s += r;
    mean = s / double(replica_regret.size());
    double var = 0.0;
    for (double r : replica_regret) var += (r - mean) * (r - mean);
    if (replica_regret.size() > 1) {
      var /= double(replica_regret.size() - 1);
      stderr_mean = std::sqrt(var / double(replica_regret.size()));
    }
  }
  bool passed() const { return invariant_failures == 0; }
};

// ---------------------------------------------------------------------------

struct BayesRunResult {
  RegretReport report;
  std::vector<EpisodeResult> episodes;
  AlgoConfig algo;
  // info-ratio aggregates
  double gain_lhs = 0.0;   // MC mean of sum_t sqrt(E_t v_t)
  double gain_bound = 0.0;   // sqrt(T log K / 2)
  bool pinsker_all_ok = true;
  bool telescoping_ok = true;
};

inline std::shared_ptr<const FinitePrior> build_or_load_prior(
    const ExperimentConfig& cfg, const GridPtr& grid, int K) {
  if (std::filesystem::is_directory(cfg.prior)) {
    auto prior = std::make_shared<FinitePrior>(load_prior_dir(cfg.prior));
    if (prior->arms() != K)
      throw std::runtime_error("prior directory grid does not match K=" + std::to_string(K));
    if (prior->horizon < cfg.T)
      throw std::runtime_error("prior directory horizon shorter than T=" + std::to_string(cfg.T));
    return prior;
  }
  return std::make_shared<const FinitePrior>(
      make_prior(cfg.prior, grid, cfg.T, cfg.M, stream_seed(cfg.seed, "prior-build")));
}

inline BayesRunResult run_bayes_experiment(const ExperimentConfig& cfg,
                                           bool full_pinsker,
                                           bool keep_traces = true) {
  auto start = std::chrono::steady_clock::now();
  BayesRunResult out;
  out.algo = AlgoConfig::make(cfg.resolved_eps(), cfg.T, cfg.seed);
  GridPtr grid = uniform_grid(out.algo.K);
  auto prior = build_or_load_prior(cfg, grid, out.algo.K);

  EpisodeOptions opt;
  opt.lemma_checks = cfg.lemma_checks;
  opt.info_metrics = true;
  opt.full_pinsker = full_pinsker;

  out.episodes.resize(std::size_t(cfg.replicas));
  parallel_replicas(cfg.replicas, cfg.threads, [&](int r) {
    out.episodes[std::size_t(r)] = run_episode(
        prior, out.algo, stream_seed(cfg.seed, "episode", std::uint64_t(r)), opt);
  });

  out.report.bound = theorem_algo_bound(out.algo.T, out.algo.K, out.algo.eps);
  double gain_sum = 0.0;
  for (auto& ep : out.episodes) {
    out.report.replica_regret.push_back(ep.regret);
    out.report.invariant_checks += 6L * cfg.T;
    out.report.invariant_failures += ep.lemma_failures;
    out.pinsker_all_ok = out.pinsker_all_ok && ep.pinsker_all_ok;
    double s = 0.0;
    for (const auto& tr : ep.trace) s += std::sqrt(std::max(0.0, tr.exp_v));
    gain_sum += s;
    double h0 = ep.entropy_series.front();
    double telescoped = h0 - ep.entropy_series.back();
    if (telescoped > h0 + 1e-9) out.telescoping_ok = false;
    if (!keep_traces) ep.trace.clear();
  }
  out.gain_lhs = gain_sum / double(cfg.replicas);
  out.gain_bound = std::sqrt(0.5 * double(cfg.T) * std::log(double(out.algo.K)));
  if (full_pinsker && !out.pinsker_all_ok) ++out.report.invariant_failures;
  out.report.finalize();
  out.report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline void emit_bayes_csv(const BayesRunResult& run, const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.out);
  for (int r = 0; r < int(run.episodes.size()); ++r) {
    const auto& ep = run.episodes[std::size_t(r)];
    if (ep.trace.empty() && cfg.T > 0) continue;
    CsvWriter w(dir / ("trace_" + std::to_string(r) + ".csv"));
    w.header("t,i_star,alpha_S,pi_istar,X_t,loss,r_t,v_t,I_t,sumS_alpha_over_w,flags");
    for (const auto& tr : ep.trace) {
      w.field(tr.t).field(tr.i_star).field(tr.alpha_S).field(tr.pi_istar)
          .field(tr.arm).field(tr.loss).field(tr.exp_r).field(tr.exp_v)
          .field(tr.exp_I).field(tr.sum_alpha_over_w)
          .field(tr.checked ? tr.flags.bits() : std::string("skipped"));
      w.endrow();
    }
    w.close();
  }
  CsvWriter rep(dir / "report.csv");
  rep.header("replica,regret,bound,passed_invariants");
  for (int r = 0; r < int(run.episodes.size()); ++r) {
    const auto& ep = run.episodes[std::size_t(r)];
    rep.field(r).field(ep.regret).field(ep.theorem_bound)
        .field(long(6L * cfg.T - ep.lemma_failures));
    rep.endrow();
  }
  rep.close();
}

inline void emit_info_csv(const BayesRunResult& run, const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.out);
  CsvWriter w(dir / "info.csv");
  w.header("t,E_r,E_v,E_I,H_t,pinsker_ok");
  for (int t = 0; t < cfg.T; ++t) {
    double er = 0, ev = 0, ei = 0, h = 0;
    bool ok = true;
    for (const auto& ep : run.episodes) {
      const auto& tr = ep.trace[std::size_t(t)];
      er += tr.exp_r;
      ev += tr.exp_v;
      ei += tr.exp_I;
      h += tr.entropy;
      ok = ok && tr.pinsker_ok;
    }
    double inv = 1.0 / double(run.episodes.size());
    w.field(t + 1).field(er * inv).field(ev * inv).field(ei * inv).field(h * inv)
        .field(ok ? 1 : 0);
    w.endrow();
  }
  w.close();
}

// ---------------------------------------------------------------------------

struct Exp3RunResult {
  RegretReport report;
  std::vector<Exp3Report> episodes;
};

inline Exp3RunResult run_exp3_experiment(const ExperimentConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  Exp3RunResult out;
  double eps = cfg.resolved_eps();
  GridKind kind = parse_grid_kind(cfg.grid);
  out.episodes.resize(std::size_t(cfg.replicas));
  parallel_replicas(cfg.replicas, cfg.threads, [&](int r) {
    auto adv = make_adversary(cfg.adversary,
                              stream_seed(cfg.seed, "adversary", std::uint64_t(r)), cfg.T);
    out.episodes[std::size_t(r)] = run_exp3_episode(
        *adv, cfg.T, kind, eps, stream_seed(cfg.seed, "exp3", std::uint64_t(r)));
  });
  for (const auto& ep : out.episodes) out.report.replica_regret.push_back(ep.regret);
  out.report.finalize();
  out.report.bound = out.episodes.empty() ? 0.0 : out.episodes.front().t23_reference;
  out.report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline void emit_exp3_csv(const Exp3RunResult& run, const ExperimentConfig& cfg) {
  CsvWriter w(std::filesystem::path(cfg.out) / "exp3_report.csv");
  w.header("replica,K,regret,t23_reference");
  for (int r = 0; r < int(run.episodes.size()); ++r) {
    const auto& ep = run.episodes[std::size_t(r)];
    w.field(r).field(ep.K).field(ep.regret).field(ep.t23_reference);
    w.endrow();
  }
  w.close();
}

// ---------------------------------------------------------------------------

struct FullInfoRunResult {
  RegretReport report;
  FullInfoResult result;
};

inline FullInfoRunResult run_fullinfo_experiment(const ExperimentConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  int M = std::min(cfg.M, 1000);
  auto prior = make_simplex_prior(cfg.prior == "iid-vee" ? "pooled" : cfg.prior,
                                  cfg.n, std::min(cfg.T, 50), M, cfg.seed);
  FullInfoRunResult out;
  bool exact = cfg.mode != "mc" && cfg.M <= 1000 && cfg.T <= 50;
  out.result = exact ? run_fullinfo_exact(prior)
                     : run_fullinfo_mc(prior, cfg.replicas > 1 ? cfg.replicas : 200,
                                       cfg.seed);
  out.report.replica_regret.push_back(out.result.cum_regret);
  out.report.bound = out.result.neyman_bound;
  out.report.invariant_checks = 4;
  if (!out.result.martingale_ok) ++out.report.invariant_failures;
  if (!out.result.tv_ok) ++out.report.invariant_failures;
  if (out.result.total_variation > out.result.neyman_bound + 1e-9)
    ++out.report.invariant_failures;
  if (out.result.cum_regret > out.result.neyman_bound + 1e-9)
    ++out.report.invariant_failures;
  out.report.finalize();
  out.report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline void emit_fullinfo_csv(const FullInfoRunResult& run, const ExperimentConfig& cfg) {
  CsvWriter w(std::filesystem::path(cfg.out) / "fullinfo.csv");
  w.header("t,lhs_tv,rhs_tv,cum_tv,neyman_bound");
  double cum = 0.0;
  for (std::size_t t = 0; t < run.result.lhs_tv.size(); ++t) {
    cum += run.result.rhs_tv[t];
    w.field(int(t) + 1).field(run.result.lhs_tv[t]).field(run.result.rhs_tv[t])
        .field(cum).field(run.result.neyman_bound);
    w.endrow();
  }
  w.close();
}

// ---------------------------------------------------------------------------

struct LemmaRunResult {
  RegretReport report;
  long rows = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
};

inline LemmaRunResult run_lemma_experiment(const ExperimentConfig& cfg);

// Dispatch by experiment kind, run, emit the CSVs, return the aggregate
// report. Deterministic given (cfg, seed) at any thread count.
inline RegretReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind == "run-bayes") {
    auto run = run_bayes_experiment(cfg, false);
    emit_bayes_csv(run, cfg);
    return run.report;
  }
  if (cfg.kind == "info-ratio") {
    auto run = run_bayes_experiment(cfg, true);
    emit_info_csv(run, cfg);
    return run.report;
  }
  if (cfg.kind == "run-exp3") {
    auto run = run_exp3_experiment(cfg);
    emit_exp3_csv(run, cfg);
    return run.report;
  }
  if (cfg.kind == "run-fullinfo") {
    auto run = run_fullinfo_experiment(cfg);
    emit_fullinfo_csv(run, cfg);
    return run.report;
  }
  if (cfg.kind == "verify-lemma") return run_lemma_experiment(cfg).report;
  throw std::invalid_argument("unknown experiment kind: " + cfg.kind);
}

inline LemmaRunResult run_lemma_experiment(const ExperimentConfig& cfg) {
  static const std::set<std::string> known = {"loc2glob", "l2bound", "logsum",
                                              "discretize"};
  if (!known.count(cfg.which))
    throw std::invalid_argument("unknown lemma target: " + cfg.which);
  auto start = std::chrono::steady_clock::now();
  LemmaRunResult out;
  std::filesystem::path dir(cfg.out);
  CsvWriter w(dir / ("lemma_" + cfg.which + ".csv"));
  w.header("instance,lhs,rhs,margin");
  auto row = [&](long id, double lhs, double rhs) {
    double margin = lhs - rhs;
    w.field(id).field(lhs).field(rhs).field(margin);
    w.endrow();
    ++out.rows;
    ++out.report.invariant_checks;
    if (margin < -kLemmaTol) ++out.report.invariant_failures;
    out.worst_margin = std::min(out.worst_margin, margin);
  };

  if (cfg.which == "loc2glob") {
    GridPtr grid = closed_grid(50);
    long id = 0;
    for (long k = 0; k < cfg.trials; ++k) {
      Rng rng(stream_seed(cfg.seed, "l2g-search", std::uint64_t(k)));
      auto inst = random_l2g_instance(rng, grid);
      if (!inst) continue;
      auto c = check_local_to_global(*inst);
      row(id++, c.lhs, c.rhs);
    }
  } else if (cfg.which == "l2bound" || cfg.which == "logsum") {
    // Live rounds of the strategy: every round of every episode feeds the
    // requested check with real (alpha, pi, S, w) data.
    ExperimentConfig sub = cfg;
    sub.kind = "run-bayes";
    sub.T = std::min(cfg.T, 64);
    sub.eps = cfg.eps > 0 ? cfg.eps : 0.125;
    sub.prior = std::filesystem::is_directory(cfg.prior) || cfg.prior != "iid-vee"
                    ? cfg.prior : "drifting-min";
    sub.replicas = std::max(1, int(cfg.trials / std::max(1, sub.T)));
    sub.M = std::min(cfg.M, 64);
    auto run = run_bayes_experiment(sub, false);
    long id = 0;
    for (const auto& ep : run.episodes)
      for (const auto& tr : ep.trace) {
        if (cfg.which == "logsum") {
          row(id++, 20.0 * std::log(2.0 * double(run.algo.K) / run.algo.eps),
              tr.sum_alpha_over_w);
        } else {
          row(id++, tr.l2_lhs, tr.l2_rhs);
        }
      }
  } else if (cfg.which == "discretize") {
    const double eps_sweep[] = {0.2, 0.1, 0.05};
    GridPtr fine = closed_grid(4097);
    long id = 0;
    long per_cell = std::max(1L, cfg.trials / long(3 * all_family_names().size()));
    for (double e : eps_sweep) {
      double delta = 0.25 * 0.5 * e * e;
      int net_n = int(std::ceil(1.0 / delta)) + 1;
      GridPtr net = closed_grid(net_n);
      for (const auto& fam : all_family_names()) {
        for (long k = 0; k < per_cell; ++k) {
          Rng rng(stream_seed(cfg.seed, "discretize/" + fam, std::uint64_t(id)));
          GridFunction f = sample_convex(rng, fine, parse_family(fam));
          double gap = grid_min_gap(f, net->pts);
          row(id++, e, gap);
        }
      }
    }
  }
  w.close();
  out.report.finalize();
  out.report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace bcolab
