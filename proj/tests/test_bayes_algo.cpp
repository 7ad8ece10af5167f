#include <catch2/catch.hpp>

#include "bcolab/bayes_algo.hpp"
#include "bcolab/info_metrics.hpp"
#include "bcolab/oracle.hpp"

using namespace bcolab;

namespace {

std::shared_ptr<const FinitePrior> static_prior(
    GridPtr grid, int T, const std::vector<std::vector<double>>& profiles,
    std::vector<double> weights) {
  FinitePrior p;
  p.grid = grid;
  p.horizon = T;
  for (std::size_t m = 0; m < profiles.size(); ++m)
    p.scenarios.push_back(Scenario{
        std::make_shared<StaticLossSeq>(T, profiles[m]), weights[m], 0});
  p.finalize();
  return std::make_shared<const FinitePrior>(std::move(p));
}

}  // namespace

TEST_CASE("algo config", "[bayes]") {
  auto cfg = AlgoConfig::make(0.1, 100, 1);
  CHECK(cfg.K == 100);
  cfg = AlgoConfig::make(1.0 / std::sqrt(400.0), 400, 1);
  CHECK(cfg.K == 400);  // K = T when eps = 1/sqrt(T)
  cfg = AlgoConfig::make(0.3, 10, 1);
  CHECK(cfg.K == 12);  // ceil(1/0.09)
  CHECK_THROWS_AS(AlgoConfig::make(0.0, 10, 1), std::invalid_argument);
}

TEST_CASE("exploit_index", "[bayes]") {
  auto g = uniform_grid(5);
  CHECK(exploit_index(GridFunction(g, {0.4, 0.4, 0.4, 0.4, 0.4})) == 0);
  CHECK(exploit_index(GridFunction(g, {0.6, 0.3, 0.1, 0.3, 0.6})) == 2);
}

TEST_CASE("candidate_set gates", "[bayes]") {
  SECTION("mass gate empties S") {
    std::vector<double> alpha = {1e-9, 1e-9, 1.0 - 2e-9};
    std::vector<double> f = {0.5, 0.4, 0.3};
    std::vector<double> diag = {0.2, 0.2, 0.4};
    // eps/K = 0.1: arms 0,1 fail the mass gate, arm 2 fails the value gate.
    auto S = candidate_set(alpha, f, diag, 2, 0.3);
    CHECK(S.empty());
  }

  SECTION("single alive scenario") {
    auto grid = uniform_grid(4);
    // Unique minimum at arm 1; the cumulative optimum is also arm 1.
    auto p = static_prior(grid, 3, {{0.8, 0.1, 0.5, 0.9}}, {1.0});
    Posterior post(p);
    auto alpha = post.alpha();
    auto f = post.mean_loss(1);
    std::vector<double> diag(4);
    for (int i = 0; i < 4; ++i) diag[std::size_t(i)] = post.cond_loss(1, i)[i];
    auto S = candidate_set(alpha.mass, f.values, diag, exploit_index(f), 0.5);
    REQUIRE(S.size() == 1);
    CHECK(S[0] == 1);
  }

  SECTION("two scenarios with disjoint minima both enter S") {
    auto grid = uniform_grid(4);
    auto p = static_prior(grid, 3,
                          {{0.0, 0.3, 0.6, 0.9}, {0.9, 0.6, 0.3, 0.0}},
                          {0.5, 0.5});
    Posterior post(p);
    auto alpha = post.alpha();
    auto f = post.mean_loss(1);  // symmetric mixture, value 0.45 everywhere
    std::vector<double> diag(4);
    for (int i = 0; i < 4; ++i) diag[std::size_t(i)] = post.cond_loss(1, i)[i];
    auto S = candidate_set(alpha.mass, f.values, diag, exploit_index(f), 0.4);
    REQUIRE(S == std::vector<int>{0, 3});
  }
}

TEST_CASE("sampling_dist formula", "[bayes]") {
  SECTION("empty S is a point mass at the exploit arm") {
    std::vector<double> alpha = {0.2, 0.3, 0.5};
    auto pi = sampling_dist(alpha, {}, 1);
    CHECK(pi == std::vector<double>{0.0, 1.0, 0.0});
  }

  SECTION("alpha(S) = 0.4 with exploit arm outside S") {
    std::vector<double> alpha = {0.25, 0.15, 0.6};
    auto pi = sampling_dist(alpha, {0, 1}, 2);
    CHECK(pi[0] == Approx(0.125));
    CHECK(pi[1] == Approx(0.075));
    CHECK(pi[2] == Approx(0.8));  // 1 - 0.4/2
  }

  SECTION("both terms add when the exploit arm is in S") {
    std::vector<double> alpha = {0.6, 0.4};
    auto pi = sampling_dist(alpha, {0}, 0);
    CHECK(pi[0] == Approx(1.0));  // 0.3 + (1 - 0.3)
    CHECK(pi[1] == 0.0);
  }

  SECTION("sums to one with the floor at the exploit arm") {
    Rng rng(17);
    for (int k = 0; k < 500; ++k) {
      int K = 2 + rng.next_index(10);
      std::vector<double> alpha(std::size_t(K), 0.0);
      double total = 0.0;
      for (double& a : alpha) total += (a = rng.next_double());
      for (double& a : alpha) a /= total;
      std::vector<int> S;
      for (int i = 0; i < K; ++i)
        if (rng.next_double() < 0.4) S.push_back(i);
      int i_star = rng.next_index(K);
      auto pi = sampling_dist(alpha, S, i_star);
      double sum = 0.0;
      for (double v : pi) sum += v;
      CHECK(sum == Approx(1.0));
      CHECK(pi[std::size_t(i_star)] >= 0.5 - kLemmaTol);
    }
  }
}

TEST_CASE("single-scenario episode plays the optimum", "[bayes]") {
  auto grid = uniform_grid(6);
  auto p = static_prior(grid, 8, {{0.8, 0.5, 0.1, 0.4, 0.7, 0.9}}, {1.0});
  auto cfg = AlgoConfig::make(1.0 / std::sqrt(6.0), 8, 5);
  REQUIRE(cfg.K == 6);
  auto ep = run_episode(p, cfg, 12345);
  CHECK(ep.regret == 0.0);  // the unique minimizer is played every round
  for (const auto& tr : ep.trace) {
    CHECK(tr.arm == 2);
    CHECK(tr.flags.all());
    CHECK(tr.pi_istar == Approx(1.0));
  }
}

TEST_CASE("episodes are deterministic given the seed", "[bayes]") {
  GridPtr grid = uniform_grid(25);
  auto prior = std::make_shared<const FinitePrior>(
      make_prior("drifting-min", grid, 12, 20, 3));
  auto cfg = AlgoConfig::make(0.2, 12, 0);
  auto a = run_episode(prior, cfg, 777);
  auto b = run_episode(prior, cfg, 777);
  REQUIRE(a.trace.size() == b.trace.size());
  CHECK(a.regret == b.regret);
  CHECK(a.scenario_index == b.scenario_index);
  for (std::size_t t = 0; t < a.trace.size(); ++t) {
    CHECK(a.trace[t].arm == b.trace[t].arm);
    CHECK(a.trace[t].loss == b.trace[t].loss);
    CHECK(a.trace[t].exp_r == b.trace[t].exp_r);
  }
  auto c = run_episode(prior, cfg, 778);
  bool identical = a.scenario_index == c.scenario_index;
  for (std::size_t t = 0; identical && t < a.trace.size(); ++t)
    identical = a.trace[t].arm == c.trace[t].arm;
  CHECK_FALSE(identical);
}

TEST_CASE("per-round invariants on random priors", "[bayes]") {
  for (const auto& name : prior_names()) {
    GridPtr grid = uniform_grid(25);
    auto prior = std::make_shared<const FinitePrior>(
        make_prior(name, grid, 10, 30, 11));
    auto cfg = AlgoConfig::make(0.2, 10, 0);
    EpisodeOptions opt;
    opt.full_pinsker = true;
    for (int r = 0; r < 10; ++r) {
      auto ep = run_episode(prior, cfg, stream_seed(5, "test-episode", std::uint64_t(r)), opt);
      CHECK(ep.lemma_failures == 0);
      CHECK(ep.pinsker_all_ok);
      for (const auto& tr : ep.trace) CHECK(tr.pi_istar >= 0.5 - kLemmaTol);
    }
  }
}

TEST_CASE("expected per-round regret agrees with enumeration", "[bayes]") {
  // Replays an episode's history through the standalone posterior ops and
  // compares the trace quantities against the definition-level versions.
  GridPtr grid = uniform_grid(9);
  auto prior = std::make_shared<const FinitePrior>(
      make_prior("iid-vee", grid, 6, 15, 29));
  auto cfg = AlgoConfig::make(1.0 / 3.0, 6, 0);
  auto ep = run_episode(prior, cfg, 31415);

  Posterior post(prior);
  for (const auto& tr : ep.trace) {
    auto alpha = post.alpha();
    auto f = post.mean_loss(tr.t);
    std::vector<double> diag(9);
    for (int i = 0; i < 9; ++i) diag[std::size_t(i)] = post.cond_loss(tr.t, i)[i];
    int i_star = exploit_index(f);
    REQUIRE(i_star == tr.i_star);
    auto S = candidate_set(alpha.mass, f.values, diag, i_star, cfg.eps);
    auto pi = sampling_dist(alpha.mass, S, i_star);
    CHECK(pi[std::size_t(i_star)] == Approx(tr.pi_istar).margin(1e-12));

    // Route (a): sum_i pi_i f(x_i) - sum_i alpha_i f_i(x_i).
    double a_route = 0.0;
    for (int i = 0; i < 9; ++i) a_route += pi[std::size_t(i)] * f[i];
    for (int i = 0; i < 9; ++i)
      if (alpha.mass[std::size_t(i)] > 0.0)
        a_route -= alpha.mass[std::size_t(i)] * diag[std::size_t(i)];
    // Route (b): expectation of the per-arm regret under pi.
    auto r = regret_per_arm(post, tr.t);
    double b_route = 0.0;
    for (int i = 0; i < 9; ++i) b_route += pi[std::size_t(i)] * r[std::size_t(i)];

    CHECK(a_route == Approx(b_route).margin(1e-9));
    CHECK(tr.exp_r == Approx(b_route).margin(1e-9));

    auto v = variance_per_arm(post, tr.t);
    double ev = 0.0;
    for (int i = 0; i < 9; ++i) ev += pi[std::size_t(i)] * v[std::size_t(i)];
    CHECK(tr.exp_v == Approx(ev).margin(1e-9));

    auto info = mutual_info_per_arm(post, tr.t);
    double ei = 0.0;
    for (int i = 0; i < 9; ++i) ei += pi[std::size_t(i)] * info[std::size_t(i)];
    CHECK(tr.exp_I == Approx(ei).margin(1e-9));

    post = post.updated(tr.t, tr.arm, tr.loss);
  }
}

TEST_CASE("theorem bound holds on a small Monte-Carlo sweep", "[bayes]") {
  GridPtr grid = uniform_grid(100);
  auto prior = std::make_shared<const FinitePrior>(
      make_prior("drifting-min", grid, 100, 50, 13));
  auto cfg = AlgoConfig::make(0.1, 100, 0);
  double total = 0.0;
  const int reps = 200;
  long failures = 0;
  for (int r = 0; r < reps; ++r) {
    auto ep = run_episode(prior, cfg, stream_seed(99, "mc", std::uint64_t(r)));
    total += ep.regret;
    failures += ep.lemma_failures;
  }
  CHECK(failures == 0);
  CHECK(total / reps <= theorem_algo_bound(cfg.T, cfg.K, cfg.eps));
}
