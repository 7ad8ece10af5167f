#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "bcolab/grid.hpp"
#include "bcolab/prior.hpp"

namespace bcolab {

// Reference implementations by direct enumeration over scenarios. These
// deliberately share no code with the Posterior fast paths: weights are
// recomputed from the full history on every call, conditional moments go
// through the second-moment route, and mutual information goes through
// the entropy-sum route. The verification suites compare the two.

struct Observation {
  int round = 0;
  int arm = 0;
  double loss = 0.0;
};

struct OracleWeights {
  std::vector<double> w;  // posterior weight per scenario (0 when dead)
};

inline OracleWeights oracle_weights(const FinitePrior& prior,
                                    const std::vector<Observation>& history) {
  OracleWeights out;
  out.w.resize(std::size_t(prior.num_scenarios()), 0.0);
  double total = 0.0;
  for (int m = 0; m < prior.num_scenarios(); ++m) {
    const auto& sc = prior.scenarios[std::size_t(m)];
    bool ok = true;
    for (const auto& obs : history)
      if (std::abs(sc.losses->eval(obs.round, obs.arm) - obs.loss) > kEtaMatch) {
        ok = false;
        break;
      }
    if (ok) {
      out.w[std::size_t(m)] = sc.weight;
      total += sc.weight;
    }
  }
  for (double& v : out.w) v /= total;
  return out;
}

inline std::vector<double> oracle_alpha(const FinitePrior& prior,
                                        const OracleWeights& ow) {
  std::vector<double> alpha(std::size_t(prior.arms()), 0.0);
  for (int m = 0; m < prior.num_scenarios(); ++m)
    alpha[std::size_t(prior.scenarios[std::size_t(m)].xstar_index)] += ow.w[std::size_t(m)];
  return alpha;
}

inline std::vector<double> oracle_mean_loss(const FinitePrior& prior,
                                            const OracleWeights& ow, int round) {
  std::vector<double> f(std::size_t(prior.arms()), 0.0);
  for (int m = 0; m < prior.num_scenarios(); ++m) {
    if (ow.w[std::size_t(m)] == 0.0) continue;
    for (int i = 0; i < prior.arms(); ++i)
      f[std::size_t(i)] += ow.w[std::size_t(m)] *
                           prior.scenarios[std::size_t(m)].losses->eval(round, i);
  }
  return f;
}

inline std::vector<double> oracle_cond_loss(const FinitePrior& prior,
                                            const OracleWeights& ow, int round,
                                            int j) {
  std::vector<double> f(std::size_t(prior.arms()), 0.0);
  double mass = 0.0;
  for (int m = 0; m < prior.num_scenarios(); ++m) {
    if (ow.w[std::size_t(m)] == 0.0) continue;
    if (prior.scenarios[std::size_t(m)].xstar_index != j) continue;
    mass += ow.w[std::size_t(m)];
    for (int i = 0; i < prior.arms(); ++i)
      f[std::size_t(i)] += ow.w[std::size_t(m)] *
                           prior.scenarios[std::size_t(m)].losses->eval(round, i);
  }
  if (mass == 0.0) return oracle_mean_loss(prior, ow, round);
  for (double& v : f) v /= mass;
  return f;
}

// r_t(x) = sum_w p_w (F_t^w(x) - F_t^w(X*_w)).
inline std::vector<double> oracle_regret(const FinitePrior& prior,
                                         const OracleWeights& ow, int round) {
  std::vector<double> r(std::size_t(prior.arms()), 0.0);
  for (int m = 0; m < prior.num_scenarios(); ++m) {
    if (ow.w[std::size_t(m)] == 0.0) continue;
    const auto& sc = prior.scenarios[std::size_t(m)];
    double best = sc.losses->eval(round, sc.xstar_index);
    for (int i = 0; i < prior.arms(); ++i)
      r[std::size_t(i)] += ow.w[std::size_t(m)] * (sc.losses->eval(round, i) - best);
  }
  return r;
}

// v_t(x) = E[(E[F_t(x)|X*])^2] - (E[F_t(x)])^2: the second-moment route.
inline std::vector<double> oracle_variance(const FinitePrior& prior,
                                           const OracleWeights& ow, int round) {
  const int K = prior.arms();
  std::vector<double> alpha = oracle_alpha(prior, ow);
  std::vector<double> mean = oracle_mean_loss(prior, ow, round);
  std::vector<double> second(std::size_t(K), 0.0);
  for (int j = 0; j < K; ++j) {
    if (alpha[std::size_t(j)] == 0.0) continue;
    auto fj = oracle_cond_loss(prior, ow, round, j);
    for (int i = 0; i < K; ++i)
      second[std::size_t(i)] += alpha[std::size_t(j)] * fj[std::size_t(i)] * fj[std::size_t(i)];
  }
  std::vector<double> v(std::size_t(K), 0.0);
  for (int i = 0; i < K; ++i)
    v[std::size_t(i)] = std::max(0.0, second[std::size_t(i)] -
                                          mean[std::size_t(i)] * mean[std::size_t(i)]);
  return v;
}

// I_t(x) = H(F) + H(X*) - H(F, X*): the entropy-sum route. Loss values
// within kEtaMatch are merged left to right in sorted order.
inline std::vector<double> oracle_mutual_info(const FinitePrior& prior,
                                              const OracleWeights& ow, int round) {
  const int K = prior.arms();
  std::vector<double> alpha = oracle_alpha(prior, ow);
  double h_star = 0.0;
  for (double a : alpha)
    if (a > 0.0) h_star -= a * std::log(a);

  std::vector<double> out(std::size_t(K), 0.0);
  for (int x = 0; x < K; ++x) {
    std::vector<std::pair<double, int>> vals;  // (loss value, scenario)
    for (int m = 0; m < prior.num_scenarios(); ++m)
      if (ow.w[std::size_t(m)] > 0.0)
        vals.push_back({prior.scenarios[std::size_t(m)].losses->eval(round, x), m});
    std::sort(vals.begin(), vals.end());
    // marginal H(F) and joint H(F, X*)
    double h_f = 0.0, h_joint = 0.0;
    std::size_t i = 0;
    while (i < vals.size()) {
      std::size_t j = i;
      double pf = 0.0;
      std::map<int, double> joint;
      while (j < vals.size() &&
             (j == i || vals[j].first - vals[j - 1].first <= kEtaMatch)) {
        double w = ow.w[std::size_t(vals[j].second)];
        pf += w;
        joint[prior.scenarios[std::size_t(vals[j].second)].xstar_index] += w;
        ++j;
      }
      h_f -= pf * std::log(pf);
      for (const auto& [arm, pj] : joint) h_joint -= pj * std::log(pj);
      i = j;
    }
    out[std::size_t(x)] = std::max(0.0, h_f + h_star - h_joint);
  }
  return out;
}

}  // namespace bcolab
