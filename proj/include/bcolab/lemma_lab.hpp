#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bcolab/convex_gen.hpp"
#include "bcolab/grid.hpp"
#include "bcolab/rng.hpp"

namespace bcolab {

// ---------------------------------------------------------------------------
// Local-to-global inequality for convex functions.
//
// For convex f, g with x_star the minimizer of f, f_star = f(x_star), a
// point x with g(x) <= f_star < f(x), and a probability measure nu on the
// closed interval between x_star and x:
//
//   ||f - g||^2_nu / (f(x) - g(x))^2
//     >= nu({x_star}) * ||f - f_star||^2_nu / (f(x) - f_star)^2

struct L2GInstance {
  GridFunction f;
  GridFunction g;
  int x_index = 0;
  int xstar_index = 0;
  DiscreteMeasure nu;
};

struct L2GCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool holds = false;
};

inline L2GCheck check_local_to_global(const L2GInstance& inst) {
  const auto& f = inst.f;
  const auto& g = inst.g;
  double f_star = f[inst.xstar_index];
  double fx = f[inst.x_index];
  double gx = g[inst.x_index];
  if (!(gx <= f_star && f_star < fx))
    throw std::invalid_argument("hypothesis not satisfied");

  double num_lhs = 0.0, num_rhs = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    double m = inst.nu.mass[std::size_t(i)];
    if (m == 0.0) continue;
    double dg = f[i] - g[i];
    double df = f[i] - f_star;
    num_lhs += m * dg * dg;
    num_rhs += m * df * df;
  }
  L2GCheck out;
  out.lhs = num_lhs / ((fx - gx) * (fx - gx));
  out.rhs = inst.nu.mass[std::size_t(inst.xstar_index)] * num_rhs /
            ((fx - f_star) * (fx - f_star));
  out.margin = out.lhs - out.rhs;
  out.holds = out.margin >= -kLemmaTol;
  return out;
}

struct L2GSearchHit {
  double margin = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::uint64_t instance_seed = 0;
};

struct L2GSearchResult {
  long trials_run = 0;
  long violations = 0;
  std::vector<L2GSearchHit> worst;  // smallest margins, ascending
};

// Draws a random valid instance on the given grid, or nothing when the
// rejection step fails (f flat at x, say).
inline std::optional<L2GInstance> random_l2g_instance(Rng& rng, const GridPtr& grid) {
  static const ConvexFamily fams[] = {
      ConvexFamily::random_slopes(), ConvexFamily::vee(0.0),
      ConvexFamily::needle_valley(1.0, 0.15), ConvexFamily::chord_linear()};
  ConvexFamily fam = fams[rng.next_index(4)];
  if (fam.kind == ConvexFamily::Kind::Vee) fam.p1 = rng.next_double();
  GridFunction f = sample_convex(rng, grid, fam);

  int xstar = argmin_grid(f);
  double f_star = f[xstar];
  // Pick x with f(x) > f_star.
  int x = -1;
  for (int attempt = 0; attempt < 64 && x < 0; ++attempt) {
    int cand = rng.next_index(f.size());
    if (f[cand] > f_star + 1e-12) x = cand;
  }
  if (x < 0) return std::nullopt;

  // g: convex function pulled below f_star at x. A random convex draw is
  // shifted and tilted so that g(x) <= f_star; g may take any real values.
  GridFunction g = sample_convex(rng, grid, ConvexFamily::random_slopes());
  double shift = g[x] - f_star + rng.next_double() * (f[x] - f_star);
  for (double& v : g.values) v -= shift;

  // nu: random atoms on the closed interval between x_star and x, with an
  // atom forced at x_star half of the time (the interesting regime).
  int lo = std::min(xstar, x), hi = std::max(xstar, x);
  std::vector<double> mass(std::size_t(f.size()), 0.0);
  for (int i = lo; i <= hi; ++i)
    if (rng.next_double() < 0.5) mass[std::size_t(i)] = rng.next_double();
  if (rng.next_double() < 0.5) mass[std::size_t(xstar)] += 0.25 + rng.next_double();
  double total = 0.0;
  for (double m : mass) total += m;
  if (total == 0.0) {
    mass[std::size_t(x)] = total = 1.0;
  }
  for (double& m : mass) m /= total;

  return L2GInstance{std::move(f), std::move(g), x, xstar,
                     DiscreteMeasure(grid, std::move(mass))};
}

// Randomized violation search; keeps the 10 instances with the smallest
// lhs - rhs margin. Any margin below -kLemmaTol counts as a violation.
inline L2GSearchResult search_violations(std::uint64_t seed, const GridPtr& grid,
                                         long trials) {
  L2GSearchResult res;
  std::vector<L2GSearchHit> hits;
  for (long k = 0; k < trials; ++k) {
    std::uint64_t inst_seed = stream_seed(seed, "l2g-search", std::uint64_t(k));
    Rng rng(inst_seed);
    auto inst = random_l2g_instance(rng, grid);
    if (!inst) continue;
    ++res.trials_run;
    L2GCheck c = check_local_to_global(*inst);
    if (!c.holds) ++res.violations;
    hits.push_back({c.margin, c.lhs, c.rhs, inst_seed});
  }
  std::sort(hits.begin(), hits.end(),
            [](const L2GSearchHit& a, const L2GSearchHit& b) { return a.margin < b.margin; });
  if (hits.size() > 10) hits.resize(10);
  res.worst = std::move(hits);
  return res;
}

// ---------------------------------------------------------------------------
// Per-round weight system.
//
//   eps_i = eps * |x_i - x_star|
//   S_i   = arms of S in the closed interval between x_i and x_star
//   w_i   = sum_{j in S_i} pi_j * ((f(x_j) - f* + eps_j) / (f(x_i) - f* + eps_i))^2
//   w_{i_star} = pi_{i_star}

struct WeightSystem {
  std::vector<int> arms;      // the arms of S, in ascending order
  std::vector<double> w;      // parallel to arms
  double weight_of(int arm) const {
    for (std::size_t k = 0; k < arms.size(); ++k)
      if (arms[k] == arm) return w[k];
    throw std::invalid_argument("arm not in S");
  }
};

inline WeightSystem build_weights(const GridFunction& f,
                                  const std::vector<double>& pi,
                                  const std::vector<int>& S, int i_star,
                                  double eps) {
  WeightSystem ws;
  ws.arms = S;
  std::sort(ws.arms.begin(), ws.arms.end());
  ws.w.resize(ws.arms.size());
  double f_star = f[i_star];
  double x_star = f.x(i_star);
  for (std::size_t k = 0; k < ws.arms.size(); ++k) {
    int i = ws.arms[k];
    if (i == i_star) {
      ws.w[k] = pi[std::size_t(i)];
      continue;
    }
    double denom = f[i] - f_star + eps * std::abs(f.x(i) - x_star);
    double xi_lo = std::min(f.x(i), x_star), xi_hi = std::max(f.x(i), x_star);
    double acc = 0.0;
    for (int j : ws.arms) {
      double xj = f.x(j);
      if (xj < xi_lo || xj > xi_hi) continue;
      double num = f[j] - f_star + eps * std::abs(xj - x_star);
      double ratio = num / denom;
      acc += pi[std::size_t(j)] * ratio * ratio;
    }
    ws.w[k] = acc;
  }
  return ws;
}

inline std::size_t column_of(const std::vector<int>& support, int arm) {
  for (std::size_t c = 0; c < support.size(); ++c)
    if (support[c] == arm) return c;
  throw std::invalid_argument("arm not in support");
}

// ||f - f_i||^2_pi >= w_i/4 * (f(x_i) - f_i(x_i))^2 - eps^2 for each i in S.
// `cond_at_support[k][c]` holds the conditional mean loss f_{S[k]} at the
// c-th arm of the pi-support.
struct L2BoundCheck {
  int arm = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

inline std::vector<L2BoundCheck> check_l2bound(
    const GridFunction& f, const std::vector<double>& pi,
    const std::vector<int>& support, const std::vector<int>& S,
    const std::vector<std::vector<double>>& cond_at_support,
    const WeightSystem& ws, double eps) {
  std::vector<L2BoundCheck> out;
  out.reserve(S.size());
  for (std::size_t k = 0; k < S.size(); ++k) {
    int i = S[k];
    double norm2 = 0.0;
    for (std::size_t c = 0; c < support.size(); ++c) {
      double d = f[support[c]] - cond_at_support[k][c];
      norm2 += pi[std::size_t(support[c])] * d * d;
    }
    double gap = f[i] - cond_at_support[k][column_of(support, i)];
    double rhs = 0.25 * ws.weight_of(i) * gap * gap - eps * eps;
    out.push_back({i, norm2, rhs, norm2 >= rhs - kLemmaTol});
  }
  return out;
}

// sum_{i in S} alpha_i / w_i <= 20 log(2K/eps).
struct LogSumCheck {
  double sum = 0.0;
  double bound = 0.0;
  bool holds = false;
};

inline LogSumCheck check_log_sum(const std::vector<double>& alpha,
                                 const WeightSystem& ws, int K, double eps) {
  LogSumCheck out;
  for (std::size_t k = 0; k < ws.arms.size(); ++k)
    out.sum += alpha[std::size_t(ws.arms[k])] / ws.w[k];
  out.bound = 20.0 * std::log(2.0 * double(K) / eps);
  out.holds = out.sum <= out.bound + kLemmaTol;
  return out;
}

// ---------------------------------------------------------------------------
// Discretization checks (delta-nets and the effective-Lipschitz property).

// Piecewise-linear evaluation of a convex grid function at any point of
// [0,1]; the PL extension is exactly the function under test.
inline double pl_eval(const GridFunction& f, double x) {
  const auto& pts = f.grid->pts;
  if (x <= pts.front()) {
    if (pts.size() == 1) return f[0];
    double s = (f[1] - f[0]) / (pts[1] - pts[0]);
    return f[0] + s * (x - pts.front());
  }
  if (x >= pts.back()) {
    int n = f.size();
    if (n == 1) return f[0];
    double s = (f[n - 1] - f[n - 2]) / (pts[std::size_t(n - 1)] - pts[std::size_t(n - 2)]);
    return f[n - 1] + s * (x - pts.back());
  }
  auto it = std::upper_bound(pts.begin(), pts.end(), x);
  std::size_t hi = std::size_t(it - pts.begin());
  std::size_t lo = hi - 1;
  double t = (x - pts[lo]) / (pts[hi] - pts[lo]);
  return f.values[lo] + t * (f.values[hi] - f.values[lo]);
}

// Covering radius of a point set over [0,1].
inline double covering_radius(const std::vector<double>& pts) {
  double r = std::max(pts.front() - 0.0, 1.0 - pts.back());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    r = std::max(r, (pts[i + 1] - pts[i]) / 2.0);
  return r;
}

// For [0,1] (a ball of radius r = 1/2), a delta-net with
// delta <= r*eps^2/4 must satisfy  min_net f <= min f + eps,  and f must be
// (1/(r*eps))-Lipschitz on the eps-shrunk interval [eps/2, 1-eps/2].
inline bool check_discretization(const GridFunction& f, const Grid& net,
                                 double eps) {
  const double r = 0.5;
  const double delta = 0.25 * r * eps * eps;
  if (covering_radius(net.pts) > delta + 1e-15)
    throw std::invalid_argument("net violates delta <= r*eps^2/4");

  double fine_min = *std::min_element(f.values.begin(), f.values.end());
  double net_min = std::numeric_limits<double>::infinity();
  for (double x : net.pts) net_min = std::min(net_min, pl_eval(f, x));
  if (net_min > fine_min + eps + kLemmaTol) return false;

  // Effective Lipschitz constant on the shrunk interval. For a convex PL
  // function the worst difference quotient from x in the interval is a
  // local segment slope or a chord to a boundary point.
  const double lip = 1.0 / (r * eps);
  const double lo = eps / 2.0, hi = 1.0 - eps / 2.0;
  const auto& pts = f.grid->pts;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double a = pts[i], b = pts[i + 1];
    if (b < lo || a > hi) continue;
    double slope = std::abs((f.values[i + 1] - f.values[i]) / (b - a));
    double za = std::max(a, lo), zb = std::min(b, hi);
    if (za <= zb && slope > lip + kLemmaTol) return false;
  }
  for (double x : {lo, hi}) {
    double fx = pl_eval(f, x);
    if (std::abs(fx - f.values.front()) > lip * (x - 0.0) + kLemmaTol) return false;
    if (std::abs(fx - f.values.back()) > lip * (1.0 - x) + kLemmaTol) return false;
  }
  return true;
}

// min over a point set minus min over the fine grid of f.
inline double grid_min_gap(const GridFunction& f, const std::vector<double>& pts) {
  double fine_min = *std::min_element(f.values.begin(), f.values.end());
  double set_min = std::numeric_limits<double>::infinity();
  for (double x : pts) set_min = std::min(set_min, pl_eval(f, x));
  return set_min - fine_min;
}

}  // namespace bcolab
