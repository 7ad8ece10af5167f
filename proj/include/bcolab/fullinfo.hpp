#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcolab/grid.hpp"
#include "bcolab/rng.hpp"

namespace bcolab {

// Full-information Bayesian play on the n-simplex: the strategy follows the
// Doob martingale X_t = E[X* | history]. Losses are max-of-affine convex
// functions, 1-Lipschitz in L1 (every affine piece has sup-norm gradient
// at most 1), mapping the simplex into [0,1] by construction.

using SimplexPoint = std::vector<double>;

inline bool is_simplex_point(const SimplexPoint& x, double tol = kTolSum) {
  double total = 0.0;
  for (double c : x) {
    if (c < -tol) return false;
    total += c;
  }
  return std::abs(total - 1.0) <= tol;
}

inline double l1_dist(const SimplexPoint& a, const SimplexPoint& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

struct MaxAffine {
  struct Piece {
    std::vector<double> grad;  // sup norm <= 1
    double offset = 0.0;
  };
  std::vector<Piece> pieces;

  double eval(std::span<const double> x) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces) {
      double v = p.offset;
      for (std::size_t i = 0; i < x.size(); ++i) v += p.grad[i] * x[i];
      best = std::max(best, v);
    }
    return best;
  }

  // Exact range certificate over the simplex: an affine piece attains its
  // extremes at vertices, so max f = max_p max_i (g_pi + b_p), and
  // f >= max_p min_i (g_pi + b_p) pointwise.
  double vertex_max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces)
      for (double g : p.grad) m = std::max(m, g + p.offset);
    return m;
  }
  double lower_certificate() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces) {
      double lo = std::numeric_limits<double>::infinity();
      for (double g : p.grad) lo = std::min(lo, g + p.offset);
      m = std::max(m, lo);
    }
    return m;
  }
  bool lipschitz_certified() const {
    for (const auto& p : pieces)
      for (double g : p.grad)
        if (std::abs(g) > 1.0 + 1e-12) return false;
    return true;
  }
};

struct SimplexScenario {
  std::vector<MaxAffine> losses;  // one per round
  double weight = 0.0;
  int xstar = 0;  // index into the candidate set
};

struct SimplexPrior {
  int n = 0;
  int T = 0;
  std::vector<SimplexPoint> candidates;  // vertices + seeded mesh
  std::vector<SimplexScenario> scenarios;
};

namespace detail {

inline MaxAffine random_max_affine(Rng& rng, int n) {
  MaxAffine f;
  const int extra = 4;  // plus the floor piece: at most 5 affine pieces
  for (int p = 0; p < extra; ++p) {
    MaxAffine::Piece piece;
    piece.grad.resize(std::size_t(n));
    double gmax = -2.0;
    for (double& g : piece.grad) {
      g = rng.uniform(-1.0, 1.0);
      gmax = std::max(gmax, g);
    }
    // Anchor the piece's vertex maximum at a level in (0,1].
    piece.offset = rng.uniform(0.3, 1.0) - gmax;
    f.pieces.push_back(std::move(piece));
  }
  f.pieces.push_back(MaxAffine::Piece{std::vector<double>(std::size_t(n), 0.0), 0.0});
  return f;
}

}  // namespace detail

// X* selector: minimum of the cumulative loss over the fixed candidate set,
// ties broken by the lexicographically smallest candidate point.
inline int select_xstar(const SimplexPrior& prior, const SimplexScenario& sc) {
  int best = -1;
  double best_val = std::numeric_limits<double>::infinity();
  for (int c = 0; c < int(prior.candidates.size()); ++c) {
    double v = 0.0;
    for (const auto& f : sc.losses) v += f.eval(prior.candidates[std::size_t(c)]);
    bool better = v < best_val;
    if (!better && v == best_val && best >= 0)
      better = std::lexicographical_compare(
          prior.candidates[std::size_t(c)].begin(), prior.candidates[std::size_t(c)].end(),
          prior.candidates[std::size_t(best)].begin(), prior.candidates[std::size_t(best)].end());
    if (better) {
      best = c;
      best_val = v;
    }
  }
  return best;
}

// The Doob strategy's play: the posterior-weighted mean of the per-scenario
// optima. `weights` must sum to one over the scenarios.
inline SimplexPoint doob_step(const SimplexPrior& prior,
                              std::span<const double> weights) {
  SimplexPoint x(std::size_t(prior.n), 0.0);
  for (std::size_t m = 0; m < prior.scenarios.size(); ++m) {
    const auto& xs = prior.candidates[std::size_t(prior.scenarios[m].xstar)];
    for (int i = 0; i < prior.n; ++i) x[std::size_t(i)] += weights[m] * xs[std::size_t(i)];
  }
  return x;
}

// Named priors over loss sequences:
//   pooled  each round draws from a small shared pool of functions, so
//           scenarios share prefixes and the posterior collapses gradually
//   static  one function per scenario replayed every round
inline SimplexPrior make_simplex_prior(const std::string& name, int n, int T,
                                       int M, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("simplex dimension must be >= 2");
  SimplexPrior prior;
  prior.n = n;
  prior.T = T;

  for (int i = 0; i < n; ++i) {
    SimplexPoint vertex(std::size_t(n), 0.0);
    vertex[std::size_t(i)] = 1.0;
    prior.candidates.push_back(std::move(vertex));
  }
  Rng mesh_rng(stream_seed(seed, "simplex-mesh"));
  for (int k = 0; k < 200; ++k) {
    SimplexPoint pt(std::size_t(n), 0.0);
    double total = 0.0;
    for (double& c : pt) {
      c = -std::log(1.0 - mesh_rng.next_double());
      total += c;
    }
    for (double& c : pt) c /= total;
    prior.candidates.push_back(std::move(pt));
  }

  if (name == "pooled") {
    const int pool_size = 2;
    std::vector<std::vector<MaxAffine>> pool(static_cast<std::size_t>(T));
    Rng pool_rng(stream_seed(seed, "simplex-pool"));
    for (int t = 0; t < T; ++t)
      for (int p = 0; p < pool_size; ++p)
        pool[std::size_t(t)].push_back(detail::random_max_affine(pool_rng, n));
    for (int m = 0; m < M; ++m) {
      Rng rng(stream_seed(seed, "simplex-scenario", std::uint64_t(m)));
      SimplexScenario sc;
      sc.weight = 1.0 / double(M);
      for (int t = 0; t < T; ++t)
        sc.losses.push_back(pool[std::size_t(t)][std::size_t(rng.next_index(pool_size))]);
      prior.scenarios.push_back(std::move(sc));
    }
  } else if (name == "static") {
    for (int m = 0; m < M; ++m) {
      Rng rng(stream_seed(seed, "simplex-scenario", std::uint64_t(m)));
      SimplexScenario sc;
      sc.weight = 1.0 / double(M);
      MaxAffine f = detail::random_max_affine(rng, n);
      sc.losses.assign(std::size_t(T), f);
      prior.scenarios.push_back(std::move(sc));
    }
  } else {
    throw std::invalid_argument("unknown simplex prior: " + name);
  }
  for (auto& sc : prior.scenarios) sc.xstar = select_xstar(prior, sc);
  return prior;
}

struct FullInfoResult {
  std::vector<double> lhs_tv;  // E[F_t(X_t) - F_t(X*)] per round
  std::vector<double> rhs_tv;  // E[||X_t - X_{t+1}||_1] per round
  SimplexPoint first_play;     // X_1, the prior mean of X*
  double total_variation = 0.0;
  double neyman_bound = 0.0;
  double cum_regret = 0.0;
  bool martingale_ok = true;
  bool tv_ok = true;
  bool exact = true;
};

// Exact evaluation by scenario enumeration. Scenarios are grouped into
// history classes (equal observed loss-function prefixes); within a class
// the Doob strategy plays the class-conditional mean of X*. The martingale
// gets a terminal element X_{T+1} = E[X* | F_{1:T}], which under the
// deterministic tie-broken selector equals X* itself.
inline FullInfoResult run_fullinfo_exact(const SimplexPrior& prior) {
  const int M = int(prior.scenarios.size());
  const int T = prior.T;
  const int n = prior.n;
  const int C = int(prior.candidates.size());

  // Observation fingerprints: values of F^w_t on the candidate set. Two
  // scenarios are history-equivalent iff their fingerprints agree; hashes
  // short-circuit most comparisons.
  std::vector<std::vector<std::vector<double>>> finger;
  finger.assign(std::size_t(M), std::vector<std::vector<double>>(std::size_t(T)));
  std::vector<std::vector<std::uint64_t>> finger_hash;
  finger_hash.assign(std::size_t(M), std::vector<std::uint64_t>(std::size_t(T), 0));
  for (int m = 0; m < M; ++m)
    for (int t = 0; t < T; ++t) {
      auto& fp = finger[std::size_t(m)][std::size_t(t)];
      fp.resize(std::size_t(C));
      for (int c = 0; c < C; ++c)
        fp[std::size_t(c)] =
            prior.scenarios[std::size_t(m)].losses[std::size_t(t)].eval(
                prior.candidates[std::size_t(c)]);
      finger_hash[std::size_t(m)][std::size_t(t)] = fnv1a64(std::string_view(
          reinterpret_cast<const char*>(fp.data()), fp.size() * sizeof(double)));
    }

  // class id per scenario for rounds 1..T+1; round 1 is the trivial class.
  std::vector<int> cls(std::size_t(M), 0);
  auto class_means = [&](const std::vector<int>& ids, int num_classes) {
    std::vector<SimplexPoint> mean(std::size_t(num_classes),
                                   SimplexPoint(std::size_t(n), 0.0));
    std::vector<double> mass(std::size_t(num_classes), 0.0);
    for (int m = 0; m < M; ++m) {
      const auto& sc = prior.scenarios[std::size_t(m)];
      mass[std::size_t(ids[std::size_t(m)])] += sc.weight;
      const auto& xs = prior.candidates[std::size_t(sc.xstar)];
      for (int i = 0; i < n; ++i)
        mean[std::size_t(ids[std::size_t(m)])][std::size_t(i)] += sc.weight * xs[std::size_t(i)];
    }
    for (int c = 0; c < num_classes; ++c)
      for (double& v : mean[std::size_t(c)]) v /= mass[std::size_t(c)];
    return std::pair(std::move(mean), std::move(mass));
  };

  int num_classes = 1;
  auto [means, masses] = class_means(cls, num_classes);

  FullInfoResult res;
  res.first_play = means[0];
  res.neyman_bound = std::sqrt(0.5 * double(T) * std::log(double(n)));

  for (int t = 1; t <= T; ++t) {
    // Refine classes by the round-t observation.
    std::vector<int> next_cls(std::size_t(M), -1);
    int next_count = 0;
    for (int c = 0; c < num_classes; ++c) {
      std::vector<int> members;
      for (int m = 0; m < M; ++m)
        if (cls[std::size_t(m)] == c) members.push_back(m);
      std::vector<int> reps;  // representative member per refined class
      for (int m : members) {
        int found = -1;
        for (std::size_t r = 0; r < reps.size(); ++r) {
          if (finger_hash[std::size_t(m)][std::size_t(t - 1)] ==
                  finger_hash[std::size_t(reps[r])][std::size_t(t - 1)] &&
              finger[std::size_t(m)][std::size_t(t - 1)] ==
                  finger[std::size_t(reps[r])][std::size_t(t - 1)]) {
            found = next_cls[std::size_t(reps[r])];
            break;
          }
        }
        if (found < 0) {
          found = next_count++;
          reps.push_back(m);
        }
        next_cls[std::size_t(m)] = found;
      }
    }
    auto [next_means, next_masses] = class_means(next_cls, next_count);

    // Martingale property: E[X_{t+1} | class at t] must equal X_t exactly.
    {
      std::vector<SimplexPoint> recon(std::size_t(num_classes),
                                      SimplexPoint(std::size_t(n), 0.0));
      for (int m = 0; m < M; ++m) {
        double w = prior.scenarios[std::size_t(m)].weight;
        for (int i = 0; i < n; ++i)
          recon[std::size_t(cls[std::size_t(m)])][std::size_t(i)] +=
              w * next_means[std::size_t(next_cls[std::size_t(m)])][std::size_t(i)];
      }
      for (int c = 0; c < num_classes; ++c)
        for (int i = 0; i < n; ++i)
          if (std::abs(recon[std::size_t(c)][std::size_t(i)] / masses[std::size_t(c)] -
                       means[std::size_t(c)][std::size_t(i)]) > 1e-9)
            res.martingale_ok = false;
    }

    double lhs = 0.0, rhs = 0.0;
    for (int m = 0; m < M; ++m) {
      const auto& sc = prior.scenarios[std::size_t(m)];
      const auto& xt = means[std::size_t(cls[std::size_t(m)])];
      const auto& xn = next_means[std::size_t(next_cls[std::size_t(m)])];
      double fx = sc.losses[std::size_t(t - 1)].eval(xt);
      double fstar = finger[std::size_t(m)][std::size_t(t - 1)][std::size_t(sc.xstar)];
      lhs += sc.weight * (fx - fstar);
      rhs += sc.weight * l1_dist(xt, xn);
    }
    res.lhs_tv.push_back(lhs);
    res.rhs_tv.push_back(rhs);
    res.cum_regret += lhs;
    res.total_variation += rhs;
    if (lhs > rhs + 1e-9) res.tv_ok = false;

    cls = std::move(next_cls);
    num_classes = next_count;
    means = std::move(next_means);
    masses = std::move(next_masses);
  }
  return res;
}

// Round-by-round comparison of the strategy's expected instantaneous
// regret against the martingale's expected step size.
struct TvRound {
  double lhs = 0.0;  // E[F_t(X_t) - F_t(X*)]
  double rhs = 0.0;  // E[||X_t - X_{t+1}||_1]
  bool holds = false;
};

inline std::vector<TvRound> check_lemma_tv(const SimplexPrior& prior) {
  auto res = run_fullinfo_exact(prior);
  std::vector<TvRound> rounds;
  for (std::size_t t = 0; t < res.lhs_tv.size(); ++t)
    rounds.push_back({res.lhs_tv[t], res.rhs_tv[t],
                      res.lhs_tv[t] <= res.rhs_tv[t] + 1e-9});
  return rounds;
}

// Total variation of the Doob martingale (with the terminal element X*)
// against sqrt(T log(n) / 2).
inline std::pair<double, double> check_neyman_bound(const SimplexPrior& prior) {
  auto res = run_fullinfo_exact(prior);
  return {res.total_variation, res.neyman_bound};
}

// Monte-Carlo fallback beyond the exact-enumeration budget: the same
// per-scenario quantities averaged over sampled scenarios.
inline FullInfoResult run_fullinfo_mc(const SimplexPrior& prior, int samples,
                                      std::uint64_t seed) {
  SimplexPrior sub;
  sub.n = prior.n;
  sub.T = prior.T;
  sub.candidates = prior.candidates;
  Rng rng(stream_seed(seed, "fullinfo-mc"));
  std::vector<double> weights;
  for (const auto& sc : prior.scenarios) weights.push_back(sc.weight);
  for (int s = 0; s < samples; ++s) {
    SimplexScenario sc = prior.scenarios[std::size_t(rng.sample_categorical(weights))];
    sc.weight = 1.0 / double(samples);
    sub.scenarios.push_back(std::move(sc));
  }
  FullInfoResult res = run_fullinfo_exact(sub);
  res.exact = false;
  return res;
}

}  // namespace bcolab
