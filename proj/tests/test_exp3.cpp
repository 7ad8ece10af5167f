#include <catch2/catch.hpp>

#include "bcolab/exp3.hpp"
#include "bcolab/lemma_lab.hpp"

using namespace bcolab;

TEST_CASE("geometric grid construction", "[exp3]") {
  auto half = build_geometric_grid(0.5);
  CHECK(half.pts == std::vector<double>{0.25, 0.5, 0.75});

  auto unit = build_geometric_grid(1.0);
  CHECK(unit.pts == std::vector<double>{0.0, 1.0});

  CHECK_THROWS_AS(build_geometric_grid(0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_geometric_grid(1.5), std::invalid_argument);

  for (double eps : {0.2, 0.1, 0.05, 0.02}) {
    auto g = build_geometric_grid(eps);
    CHECK(double(g.size()) <= 4.0 / eps * std::log(1.0 / eps));
    for (double x : g.pts) {
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
  }
}

TEST_CASE("grid min gap", "[exp3]") {
  GridPtr fine = closed_grid(100001);

  SECTION("constant function") {
    GridFunction f(fine, std::vector<double>(100001, 0.3));
    CHECK(grid_min_gap(f, build_geometric_grid(0.1).pts) == 0.0);
  }

  SECTION("needle valley inside the uncovered boundary zone") {
    const double eps = 0.1;
    GridFunction f = needle_function(fine, 1.0, eps / 2.0, false);
    double gap = grid_min_gap(f, build_geometric_grid(eps).pts);
    CHECK(gap >= 0.0);
    CHECK(gap <= 2.0 * eps + kLemmaTol);
  }

  SECTION("random sweep at eps = 0.1") {
    GridPtr fine4k = closed_grid(4097);
    auto g = build_geometric_grid(0.1);
    Rng rng(3);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      auto fam = k % 2 == 0 ? ConvexFamily::random_slopes()
                            : ConvexFamily::needle_valley(1.0, 0.2);
      GridFunction f = sample_convex(rng, fine4k, fam);
      worst = std::max(worst, grid_min_gap(f, g.pts));
    }
    CHECK(worst <= 0.2 + kLemmaTol);
  }
}

TEST_CASE("exp3 step arithmetic", "[exp3]") {
  // Two arms, no exploration mixing, equal weights; a loss of 1 on arm 0
  // becomes the importance-weighted estimate 1/0.5 = 2.
  Exp3State st;
  st.log_w = {0.0, 0.0};
  st.gamma = 0.0;
  st.eta = 0.07;
  auto p = exp3_probs(st);
  CHECK(p[0] == Approx(0.5));
  auto next = exp3_step(st, 1.0, 0);
  CHECK(next.log_w[0] == Approx(-0.07 * 2.0));
  CHECK(next.log_w[1] == 0.0);

  CHECK_THROWS_AS(exp3_step(st, 1.0, 0, 0.0), std::logic_error);
}

TEST_CASE("exp3 sampling distribution is well formed", "[exp3]") {
  Rng rng(9);
  auto st = make_exp3(7, 500);
  st.gamma = 0.1;  // exercise the exploration floor too
  for (int t = 0; t < 2000; ++t) {
    auto p = exp3_probs(st);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= st.gamma / 7 - 1e-12);
      CHECK(v <= 1.0 + 1e-12);
      sum += v;
    }
    CHECK(sum == Approx(1.0));
    int arm = rng.sample_categorical(p);
    st = exp3_step(std::move(st), rng.next_double(), arm, p[std::size_t(arm)]);
  }
}

TEST_CASE("importance-weighted estimates are conditionally unbiased", "[exp3]") {
  auto st = make_exp3(5, 100);
  st.log_w = {0.0, -0.5, -1.0, 0.2, -0.3};
  auto p = exp3_probs(st);
  std::vector<double> truth = {0.2, 0.9, 0.4, 0.6, 0.05};
  Rng rng(13);
  const int draws = 40000;
  std::vector<double> sum(5, 0.0), sumsq(5, 0.0);
  for (int d = 0; d < draws; ++d) {
    int arm = rng.sample_categorical(p);
    for (int i = 0; i < 5; ++i) {
      double est = (arm == i) ? truth[std::size_t(i)] / p[std::size_t(i)] : 0.0;
      sum[std::size_t(i)] += est;
      sumsq[std::size_t(i)] += est * est;
    }
  }
  for (int i = 0; i < 5; ++i) {
    double mean = sum[std::size_t(i)] / draws;
    double var = sumsq[std::size_t(i)] / draws - mean * mean;
    double se = std::sqrt(std::max(var, 1e-12) / draws);
    CHECK(std::abs(mean - truth[std::size_t(i)]) <= 3.0 * se + 1e-9);
  }
}

TEST_CASE("single arm is degenerate", "[exp3]") {
  auto st = make_exp3(1, 50);
  auto p = exp3_probs(st);
  REQUIRE(p.size() == 1);
  CHECK(p[0] == Approx(1.0));
  st = exp3_step(std::move(st), 0.7, 0, 1.0);
  CHECK(exp3_probs(st)[0] == Approx(1.0));
}

TEST_CASE("constant adversary has zero regret", "[exp3]") {
  ConstantAdversary adv;
  auto rep = run_exp3_episode(adv, 200, GridKind::Geometric, 0.2, 5);
  CHECK(rep.regret == Approx(0.0).margin(1e-9));
}

TEST_CASE("exp3 episodes are deterministic and stable over long horizons", "[exp3]") {
  NeedleAdversary adv(11, 2000);
  auto a = run_exp3_episode(adv, 2000, GridKind::Geometric, 0.1, 17);
  auto b = run_exp3_episode(adv, 2000, GridKind::Geometric, 0.1, 17);
  CHECK(a.regret == b.regret);
  CHECK(a.K == b.K);
  CHECK(std::isfinite(a.regret));

  // Matched arm count between the two grid kinds.
  auto u = run_exp3_episode(adv, 2000, GridKind::Uniform, 0.1, 17);
  CHECK(u.K == a.K);
}

TEST_CASE("adversary factory", "[exp3]") {
  CHECK_NOTHROW(make_adversary("constant", 1, 100));
  CHECK_NOTHROW(make_adversary("static-valley", 1, 100));
  CHECK_NOTHROW(make_adversary("needle", 1, 100));
  CHECK_THROWS_AS(make_adversary("drift", 1, 100), std::invalid_argument);

  // Adversary losses are convex in x and stay in [0,1].
  for (const char* name : {"constant", "static-valley", "needle"}) {
    auto adv = make_adversary(name, 21, 1000);
    GridPtr probe = closed_grid(257);
    std::vector<double> v;
    for (double x : probe->pts) {
      double y = adv->value(1, x);
      CHECK(y >= -kTolConvex);
      CHECK(y <= 1.0 + kTolConvex);
      v.push_back(y);
    }
    CHECK(validate_convex(GridFunction(probe, v)));
  }
}
