#include <catch2/catch.hpp>

#include <cmath>

#include "bcolab/convex_gen.hpp"
#include "bcolab/grid.hpp"

using namespace bcolab;

TEST_CASE("grid construction enforces invariants", "[convexfn]") {
  CHECK_THROWS_AS(Grid(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(Grid({0.2, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(Grid({0.5, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(Grid({-0.1, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(Grid({0.5, 1.5}), std::invalid_argument);

  auto g = uniform_grid(4);
  REQUIRE(g->size() == 4);
  CHECK(g->pts.front() == 0.25);  // excludes 0
  CHECK(g->pts.back() == 1.0);
  for (int i = 0; i < 4; ++i) CHECK((*g)[i] == Approx(double(i + 1) / 4.0));
}

TEST_CASE("validate_convex", "[convexfn]") {
  auto g = uniform_grid(3);
  CHECK(validate_convex(GridFunction(g, {0.5, 0.5, 0.5})));
  CHECK_FALSE(validate_convex(GridFunction(g, {0.0, 1.0, 0.0})));

  // Cumulative sums of nondecreasing slopes are convex by construction.
  Rng rng(7);
  auto grid = uniform_grid(40);
  for (int k = 0; k < 10000; ++k) {
    GridFunction f = sample_convex(rng, grid, ConvexFamily::random_slopes());
    REQUIRE(validate_convex(f));
    for (double v : f.values) {
      REQUIRE(v >= -kTolConvex);
      REQUIRE(v <= 1.0 + kTolConvex);
    }
  }
}

TEST_CASE("argmin_grid tie-break and oracle", "[convexfn]") {
  auto g = uniform_grid(4);
  CHECK(argmin_grid(GridFunction(g, {1.0, 0.0, 0.0, 1.0})) == 1);
  auto g1 = std::make_shared<Grid>(std::vector<double>{0.3});
  CHECK(argmin_grid(GridFunction(g1, {0.3})) == 0);

  Rng rng(11);
  auto grid = uniform_grid(31);
  for (int k = 0; k < 200; ++k) {
    GridFunction f = sample_convex(rng, grid, ConvexFamily::random_slopes());
    auto it = std::min_element(f.values.begin(), f.values.end());
    CHECK(argmin_grid(f) == int(it - f.values.begin()));
    // Stable under adding a constant.
    GridFunction shifted = f;
    for (double& v : shifted.values) v += 0.37;
    CHECK(argmin_grid(shifted) == argmin_grid(f));
  }
}

TEST_CASE("weighted_l2 values and triangle inequality", "[convexfn]") {
  auto g = uniform_grid(3);
  DiscreteMeasure uni(g, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  GridFunction f(g, {0.0, 0.25, 0.5});
  GridFunction zero(g, {0.0, 0.0, 0.0});
  GridFunction one(g, {1.0, 1.0, 1.0});

  CHECK(weighted_l2(f, f, uni) == 0.0);
  CHECK(weighted_l2(one, zero, uni) == Approx(1.0));
  CHECK(weighted_l2(f, zero, uni) ==
        Approx(std::sqrt((0.0 + 0.0625 + 0.25) / 3.0)));  // ~0.32275

  auto other = uniform_grid(4);
  GridFunction h(other, {0, 0, 0, 0});
  CHECK_THROWS_WITH(weighted_l2(f, h, uni), "grid mismatch");

  Rng rng(3);
  auto grid = uniform_grid(16);
  for (int k = 0; k < 1000; ++k) {
    GridFunction a = sample_convex(rng, grid, ConvexFamily::random_slopes());
    GridFunction b = sample_convex(rng, grid, ConvexFamily::random_slopes());
    GridFunction c = sample_convex(rng, grid, ConvexFamily::random_slopes());
    std::vector<double> mass(16, 0.0);
    double total = 0.0;
    for (double& m : mass) total += (m = rng.next_double());
    for (double& m : mass) m /= total;
    DiscreteMeasure nu(grid, mass);
    CHECK(weighted_l2(a, c, nu) <= weighted_l2(a, b, nu) + weighted_l2(b, c, nu) + 1e-9);
  }
}

TEST_CASE("regularize", "[convexfn]") {
  auto g = std::make_shared<Grid>(std::vector<double>{0.25, 0.5, 0.75, 1.0});
  GridFunction zero(g, {0.0, 0.0, 0.0, 0.0});

  GridFunction same = regularize(zero, 0.0, 1);
  CHECK(same.values == zero.values);

  GridFunction reg = regularize(zero, 0.1, 1);
  CHECK(reg[0] == Approx(0.025));
  CHECK(reg[1] == 0.0);
  CHECK(reg[2] == Approx(0.025));
  CHECK(reg[3] == Approx(0.05));

  Rng rng(5);
  auto grid = uniform_grid(25);
  for (int k = 0; k < 500; ++k) {
    GridFunction f = sample_convex(rng, grid, ConvexFamily::random_slopes());
    GridFunction fe = regularize(f, 0.2, argmin_grid(f));
    CHECK(validate_convex(fe));
    CHECK(fe[argmin_grid(f)] == f[argmin_grid(f)]);
    for (int i = 0; i < f.size(); ++i) CHECK(fe[i] >= f[i]);
  }
}

TEST_CASE("sample_convex families", "[convexfn]") {
  auto g = uniform_grid(9);
  Rng rng(42);

  GridFunction vee = sample_convex(rng, g, ConvexFamily::vee(0.5));
  // Proportional to |x - 0.5| rescaled so the largest grid value is 1.
  double norm = 0.0;
  for (double x : g->pts) norm = std::max(norm, std::abs(x - 0.5));
  for (int i = 0; i < 9; ++i)
    CHECK(vee[i] == Approx(std::abs(g->pts[std::size_t(i)] - 0.5) / norm));

  Rng a(99), b(99);
  GridFunction f1 = sample_convex(a, g, ConvexFamily::random_slopes());
  GridFunction f2 = sample_convex(b, g, ConvexFamily::random_slopes());
  CHECK(f1.values == f2.values);  // determinism

  for (int k = 0; k < 300; ++k) {
    GridFunction nf = sample_convex(rng, g, ConvexFamily::needle_valley(0.8, 0.2));
    CHECK(validate_convex(nf));
    GridFunction cf = sample_convex(rng, g, ConvexFamily::chord_linear());
    CHECK(validate_convex(cf));
  }

  CHECK_THROWS_AS(parse_family("sawtooth"), std::invalid_argument);
  CHECK(parse_family("vee").kind == ConvexFamily::Kind::Vee);
}

TEST_CASE("discrete measures", "[convexfn]") {
  auto g = uniform_grid(3);
  CHECK(DiscreteMeasure(g, {0.2, 0.3, 0.5}).valid());
  CHECK_FALSE(DiscreteMeasure(g, {0.5, 0.6, 0.5}).valid());
  CHECK_FALSE(DiscreteMeasure(g, {-0.1, 0.6, 0.5}).valid());
}
