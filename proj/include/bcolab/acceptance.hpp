#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "bcolab/experiment.hpp"
#include "bcolab/oracle.hpp"

namespace bcolab {

// The acceptance suite. Every threshold below is fixed here, in code:
//
//  A1  Bayesian regret of the strategy vs the closed-form bound
//      10 sqrt(T) log(2K/eps) + 10 eps T sqrt(log(2K/eps)),
//      T in {100,400,900}, eps = 1/sqrt(T), all four priors, M = 200,
//      200 replicas. No tolerance.
//  A2  zero per-round lemma failures across all A1 replicas.
//  A3  Pinsker v <= I/2 + 1e-9 at every arm/round/replica, and the
//      MC mean of sum_t sqrt(E_t v_t) <= 1.05 sqrt(T log(K)/2), 200 reps.
//  A4  local-to-global randomized search, 1e5 instances on a 50-point
//      grid, no margin below -1e-12.
//  A5  geometric grid: size <= (4/eps) log(1/eps) on a 50-value sweep;
//      min-gap <= 2 eps over 1e4 random convex functions per family.
//  A6  Exp3 log-log slope in [0.55, 0.78] over T in {1e3,1e4,1e5};
//      geometric <= uniform mean regret on the needle adversary (T=1e4).
//  A7  full-information exact checks, n in {2..5}, T in {10,20}, M = 100.
//  A8  posterior fast paths match brute-force enumeration on 100 random
//      instances, tolerance 1e-9.
//  A9  delta-net with delta = eps^2/8 reaches min-gap <= eps at
//      eps in {0.2, 0.1, 0.05} over 1e4 random convex functions.

struct CriterionResult {
  std::string id;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace accept {

using Clock = std::chrono::steady_clock;

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline CriterionResult criterion_regret_and_lemmas(std::uint64_t seed, int threads,
                                                   bool& lemmas_clean,
                                                   std::string& lemma_detail) {
  auto t0 = Clock::now();
  CriterionResult res{"A1", true, "", 0.0};
  lemmas_clean = true;
  std::ostringstream detail, ldetail;
  for (int T : {100, 400, 900}) {
    double eps = 1.0 / std::sqrt(double(T));
    for (const auto& prior_name : prior_names()) {
      ExperimentConfig cfg;
      cfg.kind = "run-bayes";
      cfg.prior = prior_name;
      cfg.T = T;
      cfg.eps = eps;
      cfg.replicas = 200;
      cfg.M = 200;
      cfg.seed = stream_seed(seed, "accept-a1/" + prior_name, std::uint64_t(T));
      cfg.threads = threads;
      auto run = run_bayes_experiment(cfg, /*full_pinsker=*/false, /*keep_traces=*/false);
      bool ok = run.report.mean <= run.report.bound;
      if (!ok) res.pass = false;
      if (run.report.invariant_failures > 0) lemmas_clean = false;
      detail << prior_name << "/T=" << T << ": mean=" << fmt(run.report.mean)
             << " bound=" << fmt(run.report.bound) << (ok ? " ok" : " VIOLATED") << "; ";
      ldetail << prior_name << "/T=" << T << ": " << run.report.invariant_failures
              << " failures; ";
    }
  }
  res.detail = detail.str();
  lemma_detail = ldetail.str();
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

inline CriterionResult criterion_pinsker_gain(std::uint64_t seed, int threads) {
  auto t0 = Clock::now();
  CriterionResult res{"A3", true, "", 0.0};
  ExperimentConfig cfg;
  cfg.kind = "info-ratio";
  cfg.prior = "drifting-min";
  cfg.T = 100;
  cfg.eps = 0.1;
  cfg.replicas = 200;
  cfg.M = 200;
  cfg.seed = stream_seed(seed, "accept-a3");
  cfg.threads = threads;
  auto run = run_bayes_experiment(cfg, /*full_pinsker=*/true, /*keep_traces=*/false);
  bool gain_ok = run.gain_lhs <= 1.05 * run.gain_bound;
  res.pass = run.pinsker_all_ok && gain_ok && run.telescoping_ok;
  res.detail = "pinsker=" + std::string(run.pinsker_all_ok ? "ok" : "VIOLATED") +
               " gain_lhs=" + fmt(run.gain_lhs) + " gain_bound=" + fmt(run.gain_bound) +
               " telescoping=" + std::string(run.telescoping_ok ? "ok" : "VIOLATED");
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

inline CriterionResult criterion_loc2glob(std::uint64_t seed) {
  auto t0 = Clock::now();
  CriterionResult res{"A4", true, "", 0.0};
  auto search = search_violations(stream_seed(seed, "accept-a4"), closed_grid(50), 100000);
  res.pass = search.violations == 0;
  std::ostringstream detail;
  detail << search.trials_run << " instances, " << search.violations
         << " violations; worst margins:";
  for (const auto& hit : search.worst) detail << " " << fmt(hit.margin);
  res.detail = detail.str();
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

inline CriterionResult criterion_geometric_grid(std::uint64_t seed) {
  auto t0 = Clock::now();
  CriterionResult res{"A5", true, "", 0.0};
  std::ostringstream detail;

  // Size bound on a 50-value log-spaced sweep of eps.
  int size_failures = 0;
  const double lo = 0.002, hi = 0.5;
  for (int k = 0; k < 50; ++k) {
    double eps = lo * std::pow(hi / lo, double(k) / 49.0);
    auto g = build_geometric_grid(eps);
    if (double(g.size()) > 4.0 / eps * std::log(1.0 / eps)) ++size_failures;
  }
  if (size_failures > 0) res.pass = false;
  detail << "size bound failures: " << size_failures << "; ";

  // Min-gap <= 2 eps per generator family, 1e4 functions each.
  GridPtr fine = closed_grid(4097);
  for (double eps : {0.2, 0.1, 0.05}) {
    auto g = build_geometric_grid(eps);
    double worst = 0.0;
    long bad = 0;
    for (const auto& fam : all_family_names()) {
      std::string label = "accept-a5/" + fam + "/" + fmt(eps);
      for (int k = 0; k < 10000; ++k) {
        Rng rng(stream_seed(seed, label, std::uint64_t(k)));
        GridFunction f = sample_convex(rng, fine, parse_family(fam));
        double gap = grid_min_gap(f, g.pts);
        worst = std::max(worst, gap);
        if (gap > 2.0 * eps + kLemmaTol) ++bad;
      }
    }
    if (bad > 0) res.pass = false;
    detail << "eps=" << fmt(eps) << ": worst gap " << fmt(worst) << " vs "
           << fmt(2.0 * eps) << " (" << bad << " bad); ";
  }
  res.detail = detail.str();
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

inline CriterionResult criterion_exp3(std::uint64_t seed, int threads) {
  auto t0 = Clock::now();
  CriterionResult res{"A6", true, "", 0.0};
  std::ostringstream detail;

  // Scaling: fitted log-log slope across three decades of T.
  std::vector<double> log_T, log_R;
  for (int T : {1000, 10000, 100000}) {
    ExperimentConfig cfg;
    cfg.kind = "run-exp3";
    cfg.adversary = "static-valley";
    cfg.grid = "geometric";
    cfg.T = T;
    cfg.replicas = 50;
    cfg.seed = stream_seed(seed, "accept-a6-scale");
    cfg.threads = threads;
    auto run = run_exp3_experiment(cfg);
    log_T.push_back(std::log(double(T)));
    log_R.push_back(std::log(std::max(1e-9, run.report.mean)));
    detail << "T=" << T << ": mean=" << fmt(run.report.mean)
           << " K=" << run.episodes.front().K << "; ";
  }
  double mean_x = 0, mean_y = 0;
  for (std::size_t i = 0; i < log_T.size(); ++i) {
    mean_x += log_T[i];
    mean_y += log_R[i];
  }
  mean_x /= double(log_T.size());
  mean_y /= double(log_T.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < log_T.size(); ++i) {
    num += (log_T[i] - mean_x) * (log_R[i] - mean_y);
    den += (log_T[i] - mean_x) * (log_T[i] - mean_x);
  }
  double slope = num / den;
  bool slope_ok = slope >= 0.55 && slope <= 0.78;
  if (!slope_ok) res.pass = false;
  detail << "slope=" << fmt(slope) << (slope_ok ? " ok" : " OUT OF [0.55..0.78]") << "; ";

  // Geometric vs uniform with matched K on the needle adversary.
  double mean_geo = 0, mean_uni = 0;
  for (const char* kind : {"geometric", "uniform"}) {
    ExperimentConfig cfg;
    cfg.kind = "run-exp3";
    cfg.adversary = "needle";
    cfg.grid = kind;
    cfg.T = 10000;
    cfg.replicas = 50;
    cfg.seed = stream_seed(seed, "accept-a6-needle");
    cfg.threads = threads;
    auto run = run_exp3_experiment(cfg);
    (std::string(kind) == "geometric" ? mean_geo : mean_uni) = run.report.mean;
  }
  bool cmp_ok = mean_geo <= mean_uni;
  if (!cmp_ok) res.pass = false;
  detail << "needle: geometric=" << fmt(mean_geo) << " uniform=" << fmt(mean_uni)
         << (cmp_ok ? " ok" : " VIOLATED");
  res.detail = detail.str();
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

inline CriterionResult criterion_fullinfo(std::uint64_t seed) {
  auto t0 = Clock::now();
  CriterionResult res{"A7", true, "", 0.0};
  std::ostringstream detail;
  for (int n : {2, 3, 4, 5}) {
    for (int T : {10, 20}) {
      for (const char* prior_name : {"pooled", "static"}) {
        auto prior = make_simplex_prior(prior_name, n, T, 100,
                                        stream_seed(seed, "accept-a7", std::uint64_t(n * 100 + T)));
        auto r = run_fullinfo_exact(prior);
        bool ok = r.martingale_ok && r.tv_ok &&
                  r.total_variation <= r.neyman_bound + 1e-9 &&
                  r.cum_regret <= r.neyman_bound + 1e-9;
        if (!ok) {
          res.pass = false;
          detail << prior_name << "/n=" << n << "/T=" << T << ": mart="
                 << r.martingale_ok << " tv=" << r.tv_ok << " var="
                 << fmt(r.total_variation) << " regret=" << fmt(r.cum_regret)
                 << " bound=" << fmt(r.neyman_bound) << "; ";
        }
      }
    }
  }
  if (res.pass) detail << "all 16 configurations ok";
  res.detail = detail.str();
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

inline CriterionResult criterion_oracle_equivalence(std::uint64_t seed) {
  auto t0 = Clock::now();
  CriterionResult res{"A8", true, "", 0.0};
  double worst = 0.0;
  const double tol = 1e-9;
  for (int inst = 0; inst < 100; ++inst) {
    Rng rng(stream_seed(seed, "accept-a8", std::uint64_t(inst)));
    int M = 2 + rng.next_index(19);
    int K = 2 + rng.next_index(9);
    int T = 1 + rng.next_index(5);
    GridPtr grid = uniform_grid(K);

    FinitePrior prior;
    prior.grid = grid;
    prior.horizon = T;
    for (int m = 0; m < M; ++m) {
      std::vector<std::vector<double>> rows;
      for (int t = 0; t < T; ++t)
        rows.push_back(sample_convex(rng, grid, ConvexFamily::random_slopes()).values);
      double w = 0.25 + rng.next_double();
      prior.scenarios.push_back(
          Scenario{std::make_shared<DenseLossSeq>(grid, std::move(rows)), w, 0});
    }
    double total = 0.0;
    for (auto& sc : prior.scenarios) total += sc.weight;
    for (auto& sc : prior.scenarios) sc.weight /= total;
    prior.finalize();
    auto shared = std::make_shared<const FinitePrior>(std::move(prior));

    // Random history: play random arms, observe a hidden scenario.
    int truth = rng.next_index(M);
    int obs_rounds = rng.next_index(T);
    Posterior post(shared);
    std::vector<Observation> history;
    for (int t = 1; t <= obs_rounds; ++t) {
      int arm = rng.next_index(K);
      double loss = shared->scenarios[std::size_t(truth)].losses->eval(t, arm);
      history.push_back({t, arm, loss});
      post = post.updated(t, arm, loss);
    }
    int round = obs_rounds + 1;

    auto ow = oracle_weights(*shared, history);
    auto check = [&](const std::vector<double>& got, const std::vector<double>& want) {
      for (std::size_t i = 0; i < got.size(); ++i)
        worst = std::max(worst, std::abs(got[i] - want[i]));
    };
    check(post.alpha().mass, oracle_alpha(*shared, ow));
    check(post.mean_loss(round).values, oracle_mean_loss(*shared, ow, round));
    for (int j = 0; j < K; ++j)
      check(post.cond_loss(round, j).values, oracle_cond_loss(*shared, ow, round, j));
    check(regret_per_arm(post, round), oracle_regret(*shared, ow, round));
    check(variance_per_arm(post, round), oracle_variance(*shared, ow, round));
    check(mutual_info_per_arm(post, round), oracle_mutual_info(*shared, ow, round));
  }
  res.pass = worst <= tol;
  res.detail = "worst deviation " + fmt(worst) + " vs tolerance " + fmt(tol);
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

inline CriterionResult criterion_delta_net(std::uint64_t seed) {
  auto t0 = Clock::now();
  CriterionResult res{"A9", true, "", 0.0};
  std::ostringstream detail;
  GridPtr fine = closed_grid(4097);
  for (double eps : {0.2, 0.1, 0.05}) {
    double delta = 0.125 * eps * eps;  // r = 1/2
    int net_n = int(std::ceil(1.0 / delta)) + 1;
    GridPtr net = closed_grid(net_n);
    long bad = 0;
    for (const auto& fam : all_family_names()) {
      std::string label = "accept-a9/" + fam + "/" + fmt(eps);
      for (int k = 0; k < 2500; ++k) {
        Rng rng(stream_seed(seed, label, std::uint64_t(k)));
        GridFunction f = sample_convex(rng, fine, parse_family(fam));
        if (!check_discretization(f, *net, eps)) ++bad;
      }
    }
    if (bad > 0) res.pass = false;
    detail << "eps=" << fmt(eps) << ": " << bad << " failures of 10000; ";
  }
  res.detail = detail.str();
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

}  // namespace accept

// Runs every acceptance criterion, printing one pass/fail line each and
// writing an acceptance report to out_dir.
inline std::vector<CriterionResult> run_acceptance(const std::filesystem::path& out_dir,
                                                   int threads,
                                                   std::uint64_t seed = 20150301) {
  std::vector<CriterionResult> results;
  auto log = [&](const CriterionResult& r) {
    std::printf("%s  %s  (%.1fs)  %s\n", r.pass ? "PASS" : "FAIL", r.id.c_str(),
                r.seconds, r.detail.c_str());
    std::fflush(stdout);
    results.push_back(r);
  };

  bool lemmas_clean = false;
  std::string lemma_detail;
  auto a1 = accept::criterion_regret_and_lemmas(seed, threads, lemmas_clean, lemma_detail);
  log(a1);
  log(CriterionResult{"A2", lemmas_clean, lemma_detail, 0.0});
  log(accept::criterion_pinsker_gain(seed, threads));
  log(accept::criterion_loc2glob(seed));
  log(accept::criterion_geometric_grid(seed));
  log(accept::criterion_exp3(seed, threads));
  log(accept::criterion_fullinfo(seed));
  log(accept::criterion_oracle_equivalence(seed));
  log(accept::criterion_delta_net(seed));

  std::filesystem::create_directories(out_dir);
  CsvWriter w(out_dir / "report.csv");
  w.header("criterion,pass,seconds,detail");
  for (const auto& r : results) {
    w.field(r.id).field(r.pass ? 1 : 0).field(r.seconds).field(r.detail);
    w.endrow();
  }
  w.close();
  return results;
}

}  // namespace bcolab
