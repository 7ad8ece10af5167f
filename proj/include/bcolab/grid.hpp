#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace bcolab {

// Absolute tolerance on slope comparisons when testing discrete convexity.
inline constexpr double kTolConvex = 1e-9;
// Tolerance on probability masses summing to one.
inline constexpr double kTolSum = 1e-9;
// Two loss values within this distance are treated as the same observation.
inline constexpr double kEtaMatch = 1e-9;
// A lemma check fails only if it is violated by more than this margin;
// anything closer to zero is float noise, not a counterexample.
inline constexpr double kLemmaTol = 1e-12;

// Finite ordered grid of points in [0,1], strictly increasing.
struct Grid {
  std::vector<double> pts;

  explicit Grid(std::vector<double> points) : pts(std::move(points)) {
    if (pts.empty()) throw std::invalid_argument("grid must be nonempty");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i] < 0.0 || pts[i] > 1.0)
        throw std::invalid_argument("grid point outside [0,1]");
      if (i > 0 && pts[i] <= pts[i - 1])
        throw std::invalid_argument("grid not strictly increasing");
    }
  }

  int size() const { return int(pts.size()); }
  double operator[](int i) const { return pts[std::size_t(i)]; }
};

using GridPtr = std::shared_ptr<const Grid>;

// The algorithm grid: x_i = i/K for i = 1..K. Excludes 0, includes 1.
inline GridPtr uniform_grid(int K) {
  std::vector<double> p(std::size_t(K), 0.0);
  for (int i = 1; i <= K; ++i) p[std::size_t(i - 1)] = double(i) / double(K);
  return std::make_shared<Grid>(std::move(p));
}

// Closed reference grid with n points spanning [0,1] inclusive.
inline GridPtr closed_grid(int n) {
  std::vector<double> p(std::size_t(n), 0.0);
  for (int i = 0; i < n; ++i) p[std::size_t(i)] = double(i) / double(n - 1);
  p.back() = 1.0;
  return std::make_shared<Grid>(std::move(p));
}

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
  if (a == b) return true;
  return a && b && a->pts == b->pts;
}

// Real-valued function represented by its values at the grid points.
struct GridFunction {
  GridPtr grid;
  std::vector<double> values;

  GridFunction(GridPtr g, std::vector<double> v)
      : grid(std::move(g)), values(std::move(v)) {
    if (!grid || values.size() != grid->pts.size())
      throw std::invalid_argument("grid/value size mismatch");
  }

  int size() const { return int(values.size()); }
  double operator[](int i) const { return values[std::size_t(i)]; }
  double x(int i) const { return grid->pts[std::size_t(i)]; }
};

// Probability masses over the points of a grid.
struct DiscreteMeasure {
  GridPtr grid;
  std::vector<double> mass;

  DiscreteMeasure(GridPtr g, std::vector<double> m)
      : grid(std::move(g)), mass(std::move(m)) {
    if (!grid || mass.size() != grid->pts.size())
      throw std::invalid_argument("grid/mass size mismatch");
  }

  bool valid() const {
    double total = 0.0;
    for (double m : mass) {
      if (m < 0.0) return false;
      total += m;
    }
    return std::abs(total - 1.0) <= kTolSum;
  }
};

// Discrete convexity: consecutive slopes nondecreasing within kTolConvex.
inline bool validate_convex(const GridFunction& f) {
  const auto& x = f.grid->pts;
  for (int i = 0; i + 2 < f.size(); ++i) {
    double s01 = (f[i + 1] - f[i]) / (x[std::size_t(i + 1)] - x[std::size_t(i)]);
    double s12 = (f[i + 2] - f[i + 1]) / (x[std::size_t(i + 2)] - x[std::size_t(i + 1)]);
    if (s01 > s12 + kTolConvex) return false;
  }
  return true;
}

// Smallest index attaining the minimum.
inline int argmin_values(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < int(v.size()); ++i)
    if (v[std::size_t(i)] < v[std::size_t(best)]) best = i;
  return best;
}

inline int argmin_grid(const GridFunction& f) { return argmin_values(f.values); }

// sqrt( sum_i nu_i (f_i - g_i)^2 ): the nu-weighted L2 distance.
inline double weighted_l2(const GridFunction& f, const GridFunction& g,
                          const DiscreteMeasure& nu) {
  if (!same_grid(f.grid, g.grid) || !same_grid(f.grid, nu.grid))
    throw std::invalid_argument("grid mismatch");
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    double d = f[i] - g[i];
    acc += nu.mass[std::size_t(i)] * d * d;
  }
  return std::sqrt(acc);
}

// f_eps(x) = f(x) + eps*|x - x_star|. Preserves convexity, anchors the
// minimum of a convex f at x_star.
inline GridFunction regularize(const GridFunction& f, double eps, int x_star_index) {
  if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
  if (x_star_index < 0 || x_star_index >= f.size())
    throw std::invalid_argument("x_star_index out of range");
  std::vector<double> out(f.values);
  double xs = f.x(x_star_index);
  for (int i = 0; i < f.size(); ++i)
    out[std::size_t(i)] += eps * std::abs(f.x(i) - xs);
  return GridFunction(f.grid, std::move(out));
}

}  // namespace bcolab
