#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bcolab/convex_gen.hpp"
#include "bcolab/csv.hpp"
#include "bcolab/grid.hpp"
#include "bcolab/rng.hpp"

namespace bcolab {

// One scenario's loss sequence F_{1:T} on a fixed grid. Implementations
// are either dense (values stored) or parametric (values synthesized on
// demand); the parametric forms keep large experiments within memory, a
// dense T x K x M tensor would not fit at acceptance scale.
class LossSeq {
 public:
  virtual ~LossSeq() = default;
  virtual int rounds() const = 0;
  virtual double eval(int t, int arm) const = 0;
  virtual void eval_row(int t, std::span<double> out) const {
    for (int i = 0; i < int(out.size()); ++i) out[std::size_t(i)] = eval(t, i);
  }
};

// Dense storage: one value per (round, arm).
class DenseLossSeq final : public LossSeq {
 public:
  DenseLossSeq(GridPtr grid, std::vector<std::vector<double>> rows)
      : grid_(std::move(grid)), rows_(std::move(rows)) {}
  int rounds() const override { return int(rows_.size()); }
  double eval(int t, int arm) const override {
    return rows_[std::size_t(t - 1)][std::size_t(arm)];
  }
  void eval_row(int t, std::span<double> out) const override {
    const auto& r = rows_[std::size_t(t - 1)];
    std::copy(r.begin(), r.end(), out.begin());
  }

 private:
  GridPtr grid_;
  std::vector<std::vector<double>> rows_;
};

// One fixed function replayed every round.
class StaticLossSeq final : public LossSeq {
 public:
  StaticLossSeq(int T, std::vector<double> values)
      : T_(T), values_(std::move(values)) {}
  int rounds() const override { return T_; }
  double eval(int /*t*/, int arm) const override {
    return values_[std::size_t(arm)];
  }
  void eval_row(int /*t*/, std::span<double> out) const override {
    std::copy(values_.begin(), values_.end(), out.begin());
  }

 private:
  int T_;
  std::vector<double> values_;
};

// Normalized vee |x - c_t| / max_i |x_i - c_t| with a per-round kink path.
class VeePathLossSeq final : public LossSeq {
 public:
  VeePathLossSeq(GridPtr grid, std::vector<double> kinks)
      : grid_(std::move(grid)), kinks_(std::move(kinks)) {
    inv_norms_.reserve(kinks_.size());
    for (double c : kinks_) {
      double norm = std::max(std::abs(grid_->pts.front() - c),
                             std::abs(grid_->pts.back() - c));
      inv_norms_.push_back(norm < 1e-15 ? 1.0 : 1.0 / norm);
    }
  }
  int rounds() const override { return int(kinks_.size()); }
  double eval(int t, int arm) const override {
    return std::abs(grid_->pts[std::size_t(arm)] - kinks_[std::size_t(t - 1)]) *
           inv_norms_[std::size_t(t - 1)];
  }
  void eval_row(int t, std::span<double> out) const override {
    double c = kinks_[std::size_t(t - 1)];
    double inv = inv_norms_[std::size_t(t - 1)];
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = std::abs(grid_->pts[i] - c) * inv;
  }

 private:
  GridPtr grid_;
  std::vector<double> kinks_;
  std::vector<double> inv_norms_;
};

struct Scenario {
  std::shared_ptr<const LossSeq> losses;
  double weight = 0.0;
  int xstar_index = 0;  // argmin over the grid of the cumulative loss
};

struct FinitePrior {
  GridPtr grid;
  int horizon = 0;
  std::vector<Scenario> scenarios;

  int num_scenarios() const { return int(scenarios.size()); }
  int arms() const { return grid->size(); }

  // Recomputes each scenario's cached hindsight optimum and renormalizes
  // the weights when their sum has drifted beyond tolerance.
  void finalize() {
    std::vector<double> cum(std::size_t(arms()), 0.0);
    std::vector<double> row(std::size_t(arms()), 0.0);
    double total_weight = 0.0;
    for (auto& sc : scenarios) {
      std::fill(cum.begin(), cum.end(), 0.0);
      for (int t = 1; t <= horizon; ++t) {
        sc.losses->eval_row(t, row);
        for (std::size_t i = 0; i < cum.size(); ++i) cum[i] += row[i];
      }
      sc.xstar_index = argmin_values(cum);
      total_weight += sc.weight;
    }
    if (std::abs(total_weight - 1.0) > kTolSum) {
      for (auto& sc : scenarios) sc.weight /= total_weight;
    }
  }

  // Full validation (weights, convexity, range); meant for loaded priors
  // and tests, not the generator hot path.
  void validate() const {
    if (scenarios.empty()) throw std::invalid_argument("prior has no scenarios");
    double total = 0.0;
    std::vector<double> row(std::size_t(arms()), 0.0);
    for (const auto& sc : scenarios) {
      if (sc.weight <= 0.0) throw std::invalid_argument("scenario weight must be positive");
      total += sc.weight;
      if (sc.losses->rounds() != horizon)
        throw std::invalid_argument("scenario horizon mismatch");
      for (int t = 1; t <= horizon; ++t) {
        sc.losses->eval_row(t, row);
        GridFunction f(grid, row);
        if (!validate_convex(f)) throw std::invalid_argument("scenario loss not convex");
        for (double v : row)
          if (v < -kTolConvex || v > 1.0 + kTolConvex)
            throw std::invalid_argument("scenario loss outside [0,1]");
      }
    }
    if (std::abs(total - 1.0) > kTolSum)
      throw std::invalid_argument("prior weights do not sum to 1");
  }
};

// Exact posterior over scenarios given noiseless bandit observations.
// Value type: updated() returns a new Posterior. Log-space weights keep
// M ~ 1e4 scenarios over long horizons away from underflow.
class Posterior {
 public:
  explicit Posterior(std::shared_ptr<const FinitePrior> prior)
      : prior_(std::move(prior)) {
    log_w_.reserve(prior_->scenarios.size());
    for (const auto& sc : prior_->scenarios) log_w_.push_back(std::log(sc.weight));
    normalize();
  }

  const FinitePrior& prior() const { return *prior_; }
  std::shared_ptr<const FinitePrior> prior_ptr() const { return prior_; }

  bool alive(int i) const {
    return log_w_[std::size_t(i)] != -std::numeric_limits<double>::infinity();
  }
  double weight(int i) const {
    return alive(i) ? std::exp(log_w_[std::size_t(i)]) : 0.0;
  }
  int num_alive() const {
    int n = 0;
    for (std::size_t i = 0; i < log_w_.size(); ++i) n += alive(int(i));
    return n;
  }

  // A scenario stays alive iff its loss at the played arm matches the
  // observation to within kEtaMatch. Throws if nothing survives.
  Posterior updated(int round, int arm, double observed_loss) const {
    Posterior next(*this);
    bool any = false;
    for (std::size_t i = 0; i < log_w_.size(); ++i) {
      if (!next.alive(int(i))) continue;
      double v = prior_->scenarios[i].losses->eval(round, arm);
      if (std::abs(v - observed_loss) > kEtaMatch) {
        next.log_w_[i] = -std::numeric_limits<double>::infinity();
      } else {
        any = true;
      }
    }
    if (!any) throw std::runtime_error("inconsistent observation");
    next.normalize();
    return next;
  }

  // alpha_i = Pr(X* = x_i | history): posterior mass grouped by each
  // scenario's hindsight optimum.
  DiscreteMeasure alpha() const {
    std::vector<double> mass(std::size_t(prior_->arms()), 0.0);
    for (std::size_t i = 0; i < log_w_.size(); ++i) {
      if (!alive(int(i))) continue;
      mass[std::size_t(prior_->scenarios[i].xstar_index)] += weight(int(i));
    }
    return DiscreteMeasure(prior_->grid, std::move(mass));
  }

  // f_t(x_i) = E[F_t(x_i) | history].
  GridFunction mean_loss(int round) const {
    std::vector<double> acc(std::size_t(prior_->arms()), 0.0);
    std::vector<double> row(std::size_t(prior_->arms()), 0.0);
    for (std::size_t i = 0; i < log_w_.size(); ++i) {
      if (!alive(int(i))) continue;
      double w = weight(int(i));
      prior_->scenarios[i].losses->eval_row(round, row);
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w * row[k];
    }
    return GridFunction(prior_->grid, std::move(acc));
  }

  // f_{j,t}(x_i) = E[F_t(x_i) | X* = x_j, history]. When the conditioning
  // event has zero mass this falls back to mean_loss; the algorithm's
  // alpha >= eps/K gate makes that convention unobservable.
  GridFunction cond_loss(int round, int j) const {
    std::vector<double> acc(std::size_t(prior_->arms()), 0.0);
    std::vector<double> row(std::size_t(prior_->arms()), 0.0);
    double group = 0.0;
    for (std::size_t i = 0; i < log_w_.size(); ++i) {
      if (!alive(int(i)) || prior_->scenarios[i].xstar_index != j) continue;
      double w = weight(int(i));
      group += w;
      prior_->scenarios[i].losses->eval_row(round, row);
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w * row[k];
    }
    if (group <= 0.0) return mean_loss(round);
    for (double& v : acc) v /= group;
    return GridFunction(prior_->grid, std::move(acc));
  }

 private:
  void normalize() {
    double mx = -std::numeric_limits<double>::infinity();
    for (double lw : log_w_) mx = std::max(mx, lw);
    double sum = 0.0;
    for (double lw : log_w_)
      if (lw != -std::numeric_limits<double>::infinity()) sum += std::exp(lw - mx);
    double log_total = mx + std::log(sum);
    for (double& lw : log_w_)
      if (lw != -std::numeric_limits<double>::infinity()) lw -= log_total;
  }

  std::shared_ptr<const FinitePrior> prior_;
  std::vector<double> log_w_;
};

inline Posterior update(const Posterior& post, int round, int arm, double observed) {
  return post.updated(round, arm, observed);
}

// ---------------------------------------------------------------------------
// Named prior generators.

namespace detail {

inline std::vector<double> needle_profile(const GridPtr& grid, Rng& rng) {
  // Needles share a common gentle body, so arms away from the boundary are
  // uninformative and a zero observation only censors (m <= x). The steep
  // branch 1 - x/m is where scenarios actually differ.
  double m = std::exp(rng.uniform(std::log(0.002), std::log(0.2)));
  const double r = 0.8, a = 0.1;
  std::vector<double> v(grid->pts.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double x = grid->pts[i];
    v[i] = std::max({1.0 - x / m, r * (x - a), 0.0});
  }
  return v;
}

}  // namespace detail

// Builds one of the named finite-support priors:
//   iid-vee       kink location i.i.d. over a small atom set each round
//   static-valley one random convex function repeated for all rounds
//   drifting-min  vee whose kink random-walks (lazy steps) across rounds
//   needle        static steep valley near the boundary
inline FinitePrior make_prior(const std::string& name, GridPtr grid, int T,
                              int M, std::uint64_t seed) {
  FinitePrior prior;
  prior.grid = grid;
  prior.horizon = T;
  prior.scenarios.reserve(std::size_t(M));
  const double w = 1.0 / double(M);

  for (int m = 0; m < M; ++m) {
    Rng rng(stream_seed(seed, "prior/" + name, std::uint64_t(m)));
    std::shared_ptr<const LossSeq> seq;
    if (name == "iid-vee") {
      static const double atoms[] = {0.3, 0.5, 0.7};
      std::vector<double> kinks(std::size_t(T), 0.0);
      for (auto& c : kinks) c = atoms[rng.next_index(3)];
      seq = std::make_shared<VeePathLossSeq>(grid, std::move(kinks));
    } else if (name == "static-valley") {
      GridFunction f = sample_convex(rng, grid, ConvexFamily::random_slopes());
      seq = std::make_shared<StaticLossSeq>(T, std::move(f.values));
    } else if (name == "drifting-min") {
      // Lazy random walk from a common start: the kink moves by +-step once
      // per epoch, so scenarios share path prefixes and the posterior
      // collapses branch by branch instead of after one observation.
      int epoch = std::max(1, T / 10);
      double step = 0.08;
      double c = 0.5;
      std::vector<double> kinks(std::size_t(T), 0.0);
      for (int t = 0; t < T; ++t) {
        if (t > 0 && t % epoch == 0) {
          c += (rng.next_double() < 0.5 ? -step : step);
          c = std::min(0.95, std::max(0.05, c));
        }
        kinks[std::size_t(t)] = c;
      }
      seq = std::make_shared<VeePathLossSeq>(grid, std::move(kinks));
    } else if (name == "needle") {
      seq = std::make_shared<StaticLossSeq>(T, detail::needle_profile(grid, rng));
    } else {
      throw std::invalid_argument("unknown prior: " + name);
    }
    prior.scenarios.push_back(Scenario{std::move(seq), w, 0});
  }
  prior.finalize();
  return prior;
}

inline const std::vector<std::string>& prior_names() {
  static const std::vector<std::string> names = {"iid-vee", "static-valley",
                                                 "drifting-min", "needle"};
  return names;
}

// ---------------------------------------------------------------------------
// Serialization. Single functions are "x,value" CSV; a scenario's full
// sequence is one file with header "t,x,value"; a prior is a directory of
// scenario files plus manifest.csv with "scenario_file,weight" rows.

inline void save_grid_function(const GridFunction& f,
                               const std::filesystem::path& path) {
  CsvWriter w(path);
  w.header("x,value");
  for (int i = 0; i < f.size(); ++i) {
    w.field(f.x(i)).field(f[i]);
    w.endrow();
  }
  w.close();
}

inline GridFunction load_grid_function(const std::filesystem::path& path) {
  auto rows = read_csv(path);
  std::vector<double> pts, values;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    pts.push_back(std::stod(rows[i][0]));
    values.push_back(std::stod(rows[i][1]));
  }
  return GridFunction(std::make_shared<Grid>(std::move(pts)), std::move(values));
}

inline void save_prior_dir(const FinitePrior& prior,
                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  CsvWriter manifest(dir / "manifest.csv");
  manifest.header("scenario_file,weight");
  std::vector<double> row(std::size_t(prior.arms()), 0.0);
  for (int m = 0; m < prior.num_scenarios(); ++m) {
    std::string fname = "scenario_" + std::to_string(m) + ".csv";
    manifest.field(fname).field(prior.scenarios[std::size_t(m)].weight);
    manifest.endrow();
    CsvWriter sc(dir / fname);
    sc.header("t,x,value");
    for (int t = 1; t <= prior.horizon; ++t) {
      prior.scenarios[std::size_t(m)].losses->eval_row(t, row);
      for (int i = 0; i < prior.arms(); ++i) {
        sc.field(t).field(prior.grid->pts[std::size_t(i)]).field(row[std::size_t(i)]);
        sc.endrow();
      }
    }
    sc.close();
  }
  manifest.close();
}

inline FinitePrior load_prior_dir(const std::filesystem::path& dir) {
  auto manifest = read_csv(dir / "manifest.csv");
  if (manifest.size() < 2) throw std::runtime_error("empty prior manifest: " + dir.string());
  FinitePrior prior;
  std::vector<double> grid_pts;
  for (std::size_t r = 1; r < manifest.size(); ++r) {
    const auto& entry = manifest[r];
    if (entry.size() != 2) throw std::runtime_error("bad manifest row in " + dir.string());
    auto rows = read_csv(dir / entry[0]);
    std::map<int, std::vector<double>> by_round;
    std::vector<double> pts;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      int t = std::stoi(rows[i][0]);
      by_round[t].push_back(std::stod(rows[i][2]));
      if (t == 1) pts.push_back(std::stod(rows[i][1]));
    }
    if (prior.scenarios.empty()) {
      grid_pts = pts;
      prior.grid = std::make_shared<Grid>(std::move(pts));
      prior.horizon = int(by_round.size());
    } else if (pts != grid_pts || int(by_round.size()) != prior.horizon) {
      throw std::runtime_error("scenario grid/horizon mismatch in " + dir.string());
    }
    std::vector<std::vector<double>> dense;
    dense.reserve(by_round.size());
    for (auto& [t, vals] : by_round) dense.push_back(std::move(vals));
    prior.scenarios.push_back(Scenario{
        std::make_shared<DenseLossSeq>(prior.grid, std::move(dense)),
        std::stod(entry[1]), 0});
  }
  prior.finalize();
  prior.validate();
  return prior;
}

}  // namespace bcolab
