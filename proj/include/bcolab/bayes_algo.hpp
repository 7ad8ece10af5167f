#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bcolab/grid.hpp"
#include "bcolab/info_metrics.hpp"
#include "bcolab/lemma_lab.hpp"
#include "bcolab/prior.hpp"
#include "bcolab/rng.hpp"

namespace bcolab {

// Modified Thompson Sampling over the uniform grid x_i = i/K, K = 1/eps^2.
// Each round: compute the posterior alpha over the hindsight optimum, the
// posterior mean loss f and the conditional diagonal f_i(x_i); gate arms
// into the candidate set S; exploit the minimizer of f with probability at
// least 1/2 and otherwise Thompson-sample within S.

struct AlgoConfig {
  double eps = 0.1;
  int T = 0;
  int K = 0;  // ceil(1/eps^2)
  std::uint64_t seed = 0;

  static AlgoConfig make(double eps, int T, std::uint64_t seed) {
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("eps must be in (0,1]");
    AlgoConfig cfg;
    cfg.eps = eps;
    cfg.T = T;
    cfg.K = int(std::ceil(1.0 / (eps * eps) - 1e-12));
    cfg.seed = seed;
    return cfg;
  }
};

inline double theorem_algo_bound(int T, int K, double eps) {
  double L = std::log(2.0 * double(K) / eps);
  return 10.0 * std::sqrt(double(T)) * L +
         10.0 * eps * double(T) * std::sqrt(L);
}

struct LemmaFlags {
  bool rt_bound = true;
  bool vt_bound = true;
  bool l2_bound = true;
  bool log_sum = true;
  bool pi_floor = true;
  bool chained = true;

  bool all() const {
    return rt_bound && vt_bound && l2_bound && log_sum && pi_floor && chained;
  }
  int failed() const {
    return int(!rt_bound) + int(!vt_bound) + int(!l2_bound) + int(!log_sum) +
           int(!pi_floor) + int(!chained);
  }
  std::string bits() const {
    std::string s;
    for (bool b : {rt_bound, vt_bound, l2_bound, log_sum, pi_floor, chained})
      s.push_back(b ? '1' : '0');
    return s;
  }
};

struct RoundTrace {
  int t = 0;
  int i_star = 0;
  int arm = 0;
  double alpha_S = 0.0;
  double pi_istar = 0.0;
  double loss = 0.0;
  double exp_r = 0.0;  // E_t[r_t(X_t)]
  double exp_v = 0.0;  // E_t[v_t(X_t)]
  double exp_I = 0.0;  // E_t[I_t(X_t)]
  double sum_alpha_over_w = 0.0;
  double entropy = 0.0;  // H_t(X*) entering the round
  int candidate_count = 0;
  double l2_lhs = 0.0, l2_rhs = 0.0;  // worst-margin instance of the round
  bool checked = false;               // lemma flags were actually evaluated
  LemmaFlags flags;
  bool pinsker_ok = true;
};

struct EpisodeOptions {
  bool lemma_checks = true;
  bool info_metrics = true;
  bool full_pinsker = false;  // check v <= I/2 at every arm, not just the support
};

struct EpisodeResult {
  std::vector<RoundTrace> trace;
  int scenario_index = 0;
  double regret = 0.0;  // realized: sum_t F_t(X_t) - sum_t F_t(X*)
  double theorem_bound = 0.0;
  long lemma_failures = 0;
  bool pinsker_all_ok = true;
  std::vector<double> entropy_series;  // H_1 .. H_{T+1}
};

// The exploitation index: smallest argmin of the posterior mean loss.
inline int exploit_index(const GridFunction& f_t) { return argmin_grid(f_t); }

inline std::vector<int> all_arms(int K) {
  std::vector<int> arms(std::size_t(K), 0);
  std::iota(arms.begin(), arms.end(), 0);
  return arms;
}

// S = { i : f_{i,t}(x_i) <= f_t(x*_t)  and  alpha_i >= eps/K }.
// Both comparisons are exact; tolerances would change membership semantics.
inline std::vector<int> candidate_set(const std::vector<double>& alpha,
                                      const std::vector<double>& f,
                                      const std::vector<double>& cond_diag,
                                      int i_star, double eps) {
  const int K = int(f.size());
  const double gate = eps / double(K);
  std::vector<int> S;
  for (int i = 0; i < K; ++i) {
    if (cond_diag[std::size_t(i)] <= f[std::size_t(i_star)] &&
        alpha[std::size_t(i)] >= gate)
      S.push_back(i);
  }
  return S;
}

// pi_i = alpha_i/2 * 1{i in S} + (1 - alpha(S)/2) * 1{i = i_star}; applied
// literally, so both terms add at i_star when i_star is in S.
inline std::vector<double> sampling_dist(const std::vector<double>& alpha,
                                         const std::vector<int>& S, int i_star) {
  std::vector<double> pi(alpha.size(), 0.0);
  double alpha_S = 0.0;
  for (int i : S) {
    pi[std::size_t(i)] = 0.5 * alpha[std::size_t(i)];
    alpha_S += alpha[std::size_t(i)];
  }
  pi[std::size_t(i_star)] += 1.0 - 0.5 * alpha_S;
  return pi;
}

namespace detail {

// Everything round-scoped the algorithm and its checks need, computed in
// one pass over the alive scenarios.
struct RoundContext {
  std::vector<int> alive;            // scenario indices
  std::vector<double> weight;        // posterior weights, alive order
  std::vector<double> rows;          // alive x K loss values, row-major
  std::vector<double> alpha;         // K
  std::vector<double> f;             // K
  std::vector<double> cond_diag;     // K, sentinel f[i] where alpha_i = 0
  std::vector<int> group_arm;        // arms with alpha > 0
  std::vector<double> group_mass;
  std::vector<int> group_of_alive;   // group id per alive scenario

  double row(int a, int i) const { return rows[std::size_t(a) * f.size() + std::size_t(i)]; }
};

inline RoundContext make_round_context(const Posterior& post, int round) {
  const auto& prior = post.prior();
  const int K = prior.arms();
  RoundContext ctx;
  for (int i = 0; i < prior.num_scenarios(); ++i) {
    if (!post.alive(i)) continue;
    ctx.alive.push_back(i);
    ctx.weight.push_back(post.weight(i));
  }
  const int A = int(ctx.alive.size());
  ctx.rows.resize(std::size_t(A) * std::size_t(K));
  ctx.alpha.assign(std::size_t(K), 0.0);
  ctx.f.assign(std::size_t(K), 0.0);
  ctx.cond_diag.assign(std::size_t(K), 0.0);
  std::vector<double> diag_acc(std::size_t(K), 0.0);

  std::vector<int> group_of_arm(std::size_t(K), -1);
  ctx.group_of_alive.resize(std::size_t(A));
  for (int a = 0; a < A; ++a) {
    const auto& sc = prior.scenarios[std::size_t(ctx.alive[std::size_t(a)])];
    std::span<double> row(ctx.rows.data() + std::size_t(a) * std::size_t(K), std::size_t(K));
    sc.losses->eval_row(round, row);
    double w = ctx.weight[std::size_t(a)];
    for (int i = 0; i < K; ++i) ctx.f[std::size_t(i)] += w * row[std::size_t(i)];
    int xs = sc.xstar_index;
    ctx.alpha[std::size_t(xs)] += w;
    diag_acc[std::size_t(xs)] += w * row[std::size_t(xs)];
    if (group_of_arm[std::size_t(xs)] < 0) {
      group_of_arm[std::size_t(xs)] = int(ctx.group_arm.size());
      ctx.group_arm.push_back(xs);
      ctx.group_mass.push_back(0.0);
    }
    ctx.group_of_alive[std::size_t(a)] = group_of_arm[std::size_t(xs)];
    ctx.group_mass[std::size_t(group_of_arm[std::size_t(xs)])] += w;
  }
  for (int i = 0; i < K; ++i) {
    ctx.cond_diag[std::size_t(i)] =
        ctx.alpha[std::size_t(i)] > 0.0 ? diag_acc[std::size_t(i)] / ctx.alpha[std::size_t(i)]
                                        : ctx.f[std::size_t(i)];
  }
  return ctx;
}

// Conditional mean losses per group, restricted to the given arms.
// result[g][c] = E[F_t(x_{arms[c]}) | X* group g].
inline std::vector<std::vector<double>> group_means_at(
    const RoundContext& ctx, const std::vector<int>& arms) {
  std::vector<std::vector<double>> out(
      ctx.group_arm.size(), std::vector<double>(arms.size(), 0.0));
  for (std::size_t a = 0; a < ctx.alive.size(); ++a) {
    int g = ctx.group_of_alive[a];
    double w = ctx.weight[a];
    for (std::size_t c = 0; c < arms.size(); ++c)
      out[std::size_t(g)][c] += w * ctx.row(int(a), arms[c]);
  }
  for (std::size_t g = 0; g < out.size(); ++g)
    for (double& v : out[g]) v /= ctx.group_mass[g];
  return out;
}

// Mutual information between the feedback at `arm` and X*, from the
// materialized round values.
inline double mutual_info_at(const RoundContext& ctx, int arm) {
  const std::size_t A = ctx.alive.size();
  std::vector<double> values(A);
  for (std::size_t a = 0; a < A; ++a) values[a] = ctx.row(int(a), arm);
  auto atoms = bcolab::detail::bin_loss_values(values, ctx.weight,
                                               ctx.group_of_alive,
                                               int(ctx.group_arm.size()));
  double info = 0.0;
  for (const auto& atom : atoms)
    for (std::size_t g = 0; g < ctx.group_mass.size(); ++g) {
      double joint = atom.group_mass[g];
      if (joint > 0.0)
        info += joint * std::log(joint / (ctx.group_mass[g] * atom.mass));
    }
  return std::max(0.0, info);
}

}  // namespace detail

// Runs one episode: draws a scenario from the prior (first draw of the
// episode stream), then T rounds of the strategy with one arm draw per
// round. Deterministic given (prior, cfg, episode_seed).
inline EpisodeResult run_episode(std::shared_ptr<const FinitePrior> prior,
                                 const AlgoConfig& cfg, std::uint64_t episode_seed,
                                 const EpisodeOptions& opt = {}) {
  if (prior->arms() != cfg.K)
    throw std::invalid_argument("prior grid does not match config K");
  if (prior->horizon < cfg.T)
    throw std::invalid_argument("prior horizon shorter than T");

  Rng rng(episode_seed);
  std::vector<double> prior_weights(std::size_t(prior->num_scenarios()));
  for (std::size_t i = 0; i < prior_weights.size(); ++i)
    prior_weights[i] = prior->scenarios[i].weight;
  const int truth = rng.sample_categorical(prior_weights);
  const int truth_xstar = prior->scenarios[std::size_t(truth)].xstar_index;

  EpisodeResult ep;
  ep.scenario_index = truth;
  ep.theorem_bound = theorem_algo_bound(cfg.T, cfg.K, cfg.eps);
  ep.trace.reserve(std::size_t(cfg.T));

  Posterior post(prior);
  double cum_loss = 0.0, cum_opt = 0.0;

  for (int t = 1; t <= cfg.T; ++t) {
    auto ctx = detail::make_round_context(post, t);
    const int K = cfg.K;

    RoundTrace tr;
    tr.t = t;
    tr.i_star = argmin_values(ctx.f);
    auto S = candidate_set(ctx.alpha, ctx.f, ctx.cond_diag, tr.i_star, cfg.eps);
    auto pi = sampling_dist(ctx.alpha, S, tr.i_star);
    tr.candidate_count = int(S.size());
    tr.pi_istar = pi[std::size_t(tr.i_star)];
    for (int i : S) tr.alpha_S += ctx.alpha[std::size_t(i)];
    tr.entropy = entropy_nats(ctx.alpha);

    // Support of pi: S plus the exploitation arm.
    std::vector<int> support = S;
    if (std::find(support.begin(), support.end(), tr.i_star) == support.end()) {
      support.push_back(tr.i_star);
      std::sort(support.begin(), support.end());
    }

    GridFunction f_fn(prior->grid, ctx.f);
    WeightSystem ws;
    if (opt.lemma_checks || opt.info_metrics) {
      auto cond_sup = detail::group_means_at(ctx, support);

      // E_t[r_t(X_t)] = sum_i pi_i f(x_i) - sum_i alpha_i f_i(x_i).
      double exp_loss = 0.0;
      for (int c : support) exp_loss += pi[std::size_t(c)] * ctx.f[std::size_t(c)];
      double best_term = 0.0;
      for (std::size_t g = 0; g < ctx.group_arm.size(); ++g)
        best_term += ctx.group_mass[g] * ctx.cond_diag[std::size_t(ctx.group_arm[g])];
      tr.exp_r = exp_loss - best_term;

      // v_t at the support arms and E_t[v_t(X_t)].
      std::vector<double> v_sup(support.size(), 0.0);
      for (std::size_t c = 0; c < support.size(); ++c) {
        double fv = ctx.f[std::size_t(support[c])];
        for (std::size_t g = 0; g < ctx.group_arm.size(); ++g) {
          double d = cond_sup[g][c] - fv;
          v_sup[c] += ctx.group_mass[g] * d * d;
        }
        tr.exp_v += pi[std::size_t(support[c])] * v_sup[c];
      }

      if (opt.info_metrics) {
        for (std::size_t c = 0; c < support.size(); ++c) {
          if (pi[std::size_t(support[c])] == 0.0) continue;
          tr.exp_I += pi[std::size_t(support[c])] *
                      detail::mutual_info_at(ctx, support[c]);
        }
      }

      if (opt.lemma_checks) {
        tr.checked = true;
        ws = build_weights(f_fn, pi, S, tr.i_star, cfg.eps);
        for (std::size_t k = 0; k < ws.arms.size(); ++k)
          tr.sum_alpha_over_w += ctx.alpha[std::size_t(ws.arms[k])] / ws.w[k];

        // Rt-bound: E_t[r_t] <= sum_{i in S} alpha_i (f(x_i) - f_i(x_i)) + eps.
        double rt_rhs = cfg.eps;
        for (int i : S)
          rt_rhs += ctx.alpha[std::size_t(i)] *
                    (ctx.f[std::size_t(i)] - ctx.cond_diag[std::size_t(i)]);
        tr.flags.rt_bound = tr.exp_r <= rt_rhs + kLemmaTol;

        // Vt-bound: E_t[v_t] >= sum_{i in S} alpha_i ||f - f_i||^2_pi.
        std::vector<std::vector<double>> cond_S(S.size());
        double vt_rhs = 0.0;
        for (std::size_t k = 0; k < S.size(); ++k) {
          int g = -1;
          for (std::size_t gg = 0; gg < ctx.group_arm.size(); ++gg)
            if (ctx.group_arm[gg] == S[k]) g = int(gg);
          cond_S[k] = cond_sup[std::size_t(g)];
          double norm2 = 0.0;
          for (std::size_t c = 0; c < support.size(); ++c) {
            double d = ctx.f[std::size_t(support[c])] - cond_S[k][c];
            norm2 += pi[std::size_t(support[c])] * d * d;
          }
          vt_rhs += ctx.alpha[std::size_t(S[k])] * norm2;
        }
        tr.flags.vt_bound = tr.exp_v >= vt_rhs - kLemmaTol;

        auto l2 = check_l2bound(f_fn, pi, support, S, cond_S, ws, cfg.eps);
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& c : l2) {
          tr.flags.l2_bound = tr.flags.l2_bound && c.holds;
          if (c.lhs - c.rhs < worst) {
            worst = c.lhs - c.rhs;
            tr.l2_lhs = c.lhs;
            tr.l2_rhs = c.rhs;
          }
        }

        auto ls = check_log_sum(ctx.alpha, ws, K, cfg.eps);
        tr.flags.log_sum = ls.holds;

        tr.flags.pi_floor = tr.pi_istar >= 0.5 - kLemmaTol;

        // Chained per-round bound:
        // E_t[r_t] <= 2 sqrt(sum alpha_i/w_i) (sqrt(E_t[v_t]) + eps) + eps.
        double chained = 2.0 * std::sqrt(tr.sum_alpha_over_w) *
                             (std::sqrt(std::max(0.0, tr.exp_v)) + cfg.eps) +
                         cfg.eps;
        tr.flags.chained = tr.exp_r <= chained + kLemmaTol;
      }

      if (opt.full_pinsker) {
        // v <= I/2 and 0 <= I <= H(X*) at every arm, not just the support.
        auto full_means = detail::group_means_at(ctx, all_arms(K));
        for (int x = 0; x < K; ++x) {
          double fv = ctx.f[std::size_t(x)];
          double v = 0.0;
          for (std::size_t g = 0; g < ctx.group_arm.size(); ++g) {
            double d = full_means[g][std::size_t(x)] - fv;
            v += ctx.group_mass[g] * d * d;
          }
          double info = detail::mutual_info_at(ctx, x);
          if (v > 0.5 * info + 1e-9) tr.pinsker_ok = false;
          if (info < 0.0 || info > tr.entropy + 1e-9) tr.pinsker_ok = false;
        }
      }
    }

    // Play.
    tr.arm = rng.sample_categorical(pi);
    int truth_row = -1;
    for (std::size_t a = 0; a < ctx.alive.size(); ++a)
      if (ctx.alive[a] == truth) truth_row = int(a);
    if (truth_row < 0) throw std::logic_error("true scenario eliminated");
    tr.loss = ctx.row(truth_row, tr.arm);
    cum_loss += tr.loss;
    cum_opt += ctx.row(truth_row, truth_xstar);

    post = post.updated(t, tr.arm, tr.loss);

    ep.lemma_failures += tr.flags.failed();
    ep.pinsker_all_ok = ep.pinsker_all_ok && tr.pinsker_ok;
    ep.entropy_series.push_back(tr.entropy);
    ep.trace.push_back(std::move(tr));
  }
  ep.entropy_series.push_back(posterior_entropy(post));
  ep.regret = cum_loss - cum_opt;
  return ep;
}

}  // namespace bcolab
