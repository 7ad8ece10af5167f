#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "bcolab/grid.hpp"
#include "bcolab/prior.hpp"

namespace bcolab {

// Per-round information diagnostics. All entropies and divergences are in
// nats; 0*log(0) is taken as 0 throughout.

struct InfoSnapshot {
  int t = 0;
  std::vector<double> r;  // expected regret of playing each arm
  std::vector<double> v;  // variance of the conditional mean loss
  std::vector<double> I;  // mutual information between the loss and X*
  double exp_r = 0.0, exp_v = 0.0, exp_I = 0.0;  // under the play distribution
  double entropy = 0.0;                          // H(X*) before the round
};

inline double entropy_nats(const std::vector<double>& p) {
  double h = 0.0;
  for (double m : p)
    if (m > 0.0) h -= m * std::log(m);
  return h;
}

inline double posterior_entropy(const Posterior& post) {
  return entropy_nats(post.alpha().mass);
}

// r_t(x) = f_t(x) - sum_j alpha_j f_{j,t}(x_j).
inline std::vector<double> regret_per_arm(const Posterior& post, int round) {
  GridFunction f = post.mean_loss(round);
  double best = 0.0;
  const auto& prior = post.prior();
  for (int i = 0; i < prior.num_scenarios(); ++i) {
    if (!post.alive(i)) continue;
    const auto& sc = prior.scenarios[std::size_t(i)];
    best += post.weight(i) * sc.losses->eval(round, sc.xstar_index);
  }
  std::vector<double> out(f.values);
  for (double& y : out) y -= best;
  return out;
}

// v_t(x) = sum_j alpha_j (f_{j,t}(x) - f_t(x))^2, over groups with mass.
inline std::vector<double> variance_per_arm(const Posterior& post, int round) {
  GridFunction f = post.mean_loss(round);
  DiscreteMeasure alpha = post.alpha();
  std::vector<double> out(std::size_t(f.size()), 0.0);
  for (int j = 0; j < f.size(); ++j) {
    double a = alpha.mass[std::size_t(j)];
    if (a <= 0.0) continue;
    GridFunction fj = post.cond_loss(round, j);
    for (int i = 0; i < f.size(); ++i) {
      double d = fj[i] - f[i];
      out[std::size_t(i)] += a * d * d;
    }
  }
  return out;
}

namespace detail {

// The observation F_t(x) takes one value per alive scenario; values within
// kEtaMatch collapse to a single atom, making the discrete distribution of
// the feedback well defined.
struct LossAtom {
  double value = 0.0;
  double mass = 0.0;                 // marginal probability of the atom
  std::vector<double> group_mass;    // joint mass per X*-group
};

inline std::vector<LossAtom> bin_loss_values(
    const std::vector<double>& values, const std::vector<double>& weights,
    const std::vector<int>& groups, int num_groups) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<LossAtom> atoms;
  for (std::size_t k : order) {
    if (atoms.empty() || values[k] - atoms.back().value > kEtaMatch) {
      atoms.push_back(LossAtom{values[k], 0.0, std::vector<double>(std::size_t(num_groups), 0.0)});
    }
    atoms.back().mass += weights[k];
    atoms.back().group_mass[std::size_t(groups[k])] += weights[k];
  }
  return atoms;
}

}  // namespace detail

// I_t(x): mutual information (nats) between the feedback F_t(x) and X*.
// Computed as sum_y alpha_y KL(Q_{x|y} || Q_x), the standard decomposition.
// With reverse_kl the arguments are swapped, which can be +infinity
// when the marginal carries an atom a conditional lacks.
inline std::vector<double> mutual_info_per_arm(const Posterior& post, int round,
                                               bool reverse_kl = false) {
  const auto& prior = post.prior();
  const int K = prior.arms();

  std::vector<double> weights;
  std::vector<int> scen;
  for (int i = 0; i < prior.num_scenarios(); ++i) {
    if (!post.alive(i)) continue;
    weights.push_back(post.weight(i));
    scen.push_back(i);
  }
  // Compact group ids over arms that carry posterior mass.
  std::vector<int> group_of_arm(std::size_t(K), -1);
  int num_groups = 0;
  std::vector<int> groups(scen.size());
  std::vector<double> group_mass;
  for (std::size_t k = 0; k < scen.size(); ++k) {
    int arm = prior.scenarios[std::size_t(scen[k])].xstar_index;
    if (group_of_arm[std::size_t(arm)] < 0) {
      group_of_arm[std::size_t(arm)] = num_groups++;
      group_mass.push_back(0.0);
    }
    groups[k] = group_of_arm[std::size_t(arm)];
    group_mass[std::size_t(groups[k])] += weights[k];
  }

  std::vector<double> out(std::size_t(K), 0.0);
  std::vector<double> values(scen.size());
  for (int x = 0; x < K; ++x) {
    for (std::size_t k = 0; k < scen.size(); ++k)
      values[k] = prior.scenarios[std::size_t(scen[k])].losses->eval(round, x);
    auto atoms = detail::bin_loss_values(values, weights, groups, num_groups);
    double info = 0.0;
    for (const auto& atom : atoms) {
      for (int g = 0; g < num_groups; ++g) {
        double joint = atom.group_mass[std::size_t(g)];
        double ag = group_mass[std::size_t(g)];
        if (!reverse_kl) {
          if (joint > 0.0) info += joint * std::log(joint / (ag * atom.mass));
        } else {
          double q_marg = atom.mass;
          double q_cond = joint / ag;
          if (q_marg > 0.0) {
            if (q_cond <= 0.0) {
              info = std::numeric_limits<double>::infinity();
            } else {
              info += ag * q_marg * std::log(q_marg / q_cond);
            }
          }
        }
      }
    }
    out[std::size_t(x)] = std::max(0.0, info);
  }
  return out;
}

// Pinsker relation v_t(x) <= I_t(x)/2 at every arm.
inline bool check_pinsker(const InfoSnapshot& snap) {
  for (std::size_t i = 0; i < snap.v.size(); ++i)
    if (snap.v[i] > 0.5 * snap.I[i] + 1e-9) return false;
  return true;
}

inline InfoSnapshot info_snapshot(const Posterior& post, int round,
                                  const std::vector<double>& play_dist) {
  InfoSnapshot snap;
  snap.t = round;
  snap.r = regret_per_arm(post, round);
  snap.v = variance_per_arm(post, round);
  snap.I = mutual_info_per_arm(post, round);
  snap.entropy = posterior_entropy(post);
  for (std::size_t i = 0; i < play_dist.size(); ++i) {
    snap.exp_r += play_dist[i] * snap.r[i];
    snap.exp_v += play_dist[i] * snap.v[i];
    snap.exp_I += play_dist[i] * snap.I[i];
  }
  return snap;
}

// Monte-Carlo mean of sum_t sqrt(E_t[v_t(X_t)]) against sqrt(T log(K) / 2),
// plus the per-episode entropy telescoping sum_t (H_t - H_{t+1}) <= H_1.
struct InfoBound {
  double mc_mean = 0.0;      // mean over episodes of sum_t sqrt(E_t v_t)
  double bound = 0.0;        // sqrt(T log K / 2)
  bool telescoping_ok = true;
};

inline InfoBound cumulative_info_bound(
    const std::vector<std::vector<double>>& exp_v_per_episode,
    const std::vector<std::vector<double>>& entropy_per_episode, int T, int K) {
  InfoBound out;
  out.bound = std::sqrt(0.5 * double(T) * std::log(double(K)));
  for (const auto& ep : exp_v_per_episode) {
    double s = 0.0;
    for (double ev : ep) s += std::sqrt(std::max(0.0, ev));
    out.mc_mean += s;
  }
  if (!exp_v_per_episode.empty()) out.mc_mean /= double(exp_v_per_episode.size());
  for (const auto& hs : entropy_per_episode) {
    if (hs.size() < 2) continue;
    double drop = hs.front() - hs.back();
    double telescoped = 0.0;
    for (std::size_t t = 0; t + 1 < hs.size(); ++t) telescoped += hs[t] - hs[t + 1];
    if (std::abs(telescoped - drop) > 1e-9 || drop > hs.front() + 1e-9)
      out.telescoping_ok = false;
  }
  return out;
}

}  // namespace bcolab
