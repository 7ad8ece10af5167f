#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bcolab/grid.hpp"
#include "bcolab/rng.hpp"

namespace bcolab {

// Generator families for random convex test functions, values in [0,1].
struct ConvexFamily {
  enum class Kind { RandomSlopes, Vee, NeedleValley, ChordLinear };
  Kind kind = Kind::RandomSlopes;
  double p1 = 0.0;  // Vee: kink location. NeedleValley: depth.
  double p2 = 0.0;  // NeedleValley: width of the boundary zone.

  static ConvexFamily random_slopes() { return {Kind::RandomSlopes, 0, 0}; }
  static ConvexFamily vee(double kink) { return {Kind::Vee, kink, 0}; }
  static ConvexFamily needle_valley(double depth, double width) {
    return {Kind::NeedleValley, depth, width};
  }
  static ConvexFamily chord_linear() { return {Kind::ChordLinear, 0, 0}; }
};

inline ConvexFamily parse_family(std::string_view name) {
  if (name == "random-slopes") return ConvexFamily::random_slopes();
  if (name == "vee") return ConvexFamily::vee(0.5);
  if (name == "needle-valley") return ConvexFamily::needle_valley(1.0, 0.1);
  if (name == "chord-linear") return ConvexFamily::chord_linear();
  throw std::invalid_argument("unknown convex family: " + std::string(name));
}

namespace detail {

// Rescale values affinely into [0,1]; affine maps preserve convexity.
inline void rescale_unit(std::vector<double>& v) {
  double lo = v[0], hi = v[0];
  for (double y : v) {
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  if (hi - lo < 1e-12) {
    for (double& y : v) y = 0.5;
    return;
  }
  for (double& y : v) y = (y - lo) / (hi - lo);
}

}  // namespace detail

// |x - c| rescaled so the largest grid value is 1.
inline GridFunction vee_function(const GridPtr& grid, double kink) {
  std::vector<double> v(grid->pts.size());
  double norm = 0.0;
  for (double x : grid->pts) norm = std::max(norm, std::abs(x - kink));
  if (norm < 1e-15) norm = 1.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = std::abs(grid->pts[i] - kink) / norm;
  return GridFunction(grid, std::move(v));
}

// Steep valley hugging one boundary: bottom value 1-depth at location m,
// left branch as steep as the [0,1] range allows (non-Lipschitz as m -> 0),
// right branch rising back to 1 at the far end. `mirror` flips sides.
inline GridFunction needle_function(const GridPtr& grid, double depth,
                                    double m, bool mirror) {
  double b = 1.0 - std::min(std::max(depth, 0.0), 1.0);
  m = std::min(std::max(m, 1e-6), 0.5);
  std::vector<double> v(grid->pts.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double x = grid->pts[i];
    if (mirror) x = 1.0 - x;
    double left = (1.0 - b) * (m - x) / m;
    double right = (1.0 - b) * (x - m) / (1.0 - m);
    v[i] = b + std::max({left, right, 0.0});
  }
  return GridFunction(grid, std::move(v));
}

// Draws a random convex function from the requested family; deterministic
// given the generator state, values in [0,1].
inline GridFunction sample_convex(Rng& rng, const GridPtr& grid,
                                  const ConvexFamily& family) {
  const int n = grid->size();
  switch (family.kind) {
    case ConvexFamily::Kind::RandomSlopes: {
      // Cumulative sums of nondecreasing slopes, then rescaled.
      std::vector<double> v(std::size_t(n), 0.0);
      double slope = rng.uniform(-2.0, 2.0);
      double gain = 4.0 / std::max(1, n - 1);
      for (int i = 1; i < n; ++i) {
        v[std::size_t(i)] = v[std::size_t(i - 1)] +
                            slope * (grid->pts[std::size_t(i)] - grid->pts[std::size_t(i - 1)]);
        slope += gain * rng.next_double();
      }
      detail::rescale_unit(v);
      return GridFunction(grid, std::move(v));
    }
    case ConvexFamily::Kind::Vee:
      return vee_function(grid, family.p1);
    case ConvexFamily::Kind::NeedleValley: {
      double w = family.p2 > 0 ? family.p2 : 0.1;
      double m = w * std::pow(rng.uniform(0.01, 1.0), 2.0);
      bool mirror = rng.next_double() < 0.5;
      return needle_function(grid, family.p1, m, mirror);
    }
    case ConvexFamily::Kind::ChordLinear: {
      double v0 = rng.next_double();
      double v1 = rng.next_double();
      std::vector<double> v(std::size_t(n), 0.0);
      for (int i = 0; i < n; ++i)
        v[std::size_t(i)] = v0 + (v1 - v0) * grid->pts[std::size_t(i)];
      return GridFunction(grid, std::move(v));
    }
  }
  throw std::invalid_argument("unknown convex family");
}

inline const std::vector<std::string>& all_family_names() {
  static const std::vector<std::string> names = {
      "random-slopes", "vee", "needle-valley", "chord-linear"};
  return names;
}

}  // namespace bcolab
