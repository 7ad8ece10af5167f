#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "bcolab/experiment.hpp"

using namespace bcolab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("seventeen-digit floats round-trip", "[harness]") {
  Rng rng(15);
  for (int k = 0; k < 2000; ++k) {
    double v = (rng.next_double() - 0.5) * std::pow(10.0, rng.next_index(12) - 6);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("stream seeds are stable and label-separated", "[harness]") {
  CHECK(stream_seed(1, "episode", 0) == stream_seed(1, "episode", 0));
  CHECK(stream_seed(1, "episode", 0) != stream_seed(1, "episode", 1));
  CHECK(stream_seed(1, "episode", 0) != stream_seed(1, "adversary", 0));
  CHECK(stream_seed(1, "episode", 0) != stream_seed(2, "episode", 0));
}

TEST_CASE("config file parsing", "[harness]") {
  fs::path file = fs::temp_directory_path() / "bcolab_cfg_test.txt";
  {
    std::ofstream out(file);
    out << "# comment line\n"
        << "kind = run-bayes\n"
        << "prior=needle\n"
        << "T = 64   # trailing comment\n"
        << "eps = auto\n"
        << "replicas = 7\n"
        << "seed = 42\n"
        << "threads = 2\n"
        << "lemma_checks = off\n";
  }
  ExperimentConfig cfg;
  apply_config_file(cfg, file);
  CHECK(cfg.kind == "run-bayes");
  CHECK(cfg.prior == "needle");
  CHECK(cfg.T == 64);
  CHECK(cfg.eps == 0.0);
  CHECK(cfg.resolved_eps() == Approx(1.0 / 8.0));
  CHECK(cfg.replicas == 7);
  CHECK(cfg.seed == 42);
  CHECK(cfg.threads == 2);
  CHECK_FALSE(cfg.lemma_checks);
  fs::remove(file);

  fs::path bad = fs::temp_directory_path() / "bcolab_cfg_bad.txt";
  {
    std::ofstream out(bad);
    out << "mystery = 1\n";
  }
  ExperimentConfig cfg2;
  CHECK_THROWS(apply_config_file(cfg2, bad));
  fs::remove(bad);
  CHECK_THROWS(apply_config_file(cfg2, fs::temp_directory_path() / "does_not_exist.cfg"));
}

TEST_CASE("auto epsilon rules", "[harness]") {
  ExperimentConfig cfg;
  cfg.T = 100;
  cfg.kind = "run-bayes";
  CHECK(cfg.resolved_eps() == Approx(0.1));
  cfg.kind = "run-exp3";
  cfg.T = 1000;
  CHECK(cfg.resolved_eps() == Approx(0.1));
  cfg.eps = 0.25;
  CHECK(cfg.resolved_eps() == 0.25);
}

TEST_CASE("experiment outputs are byte-identical across runs and thread counts",
          "[harness]") {
  ExperimentConfig cfg;
  cfg.kind = "run-bayes";
  cfg.prior = "iid-vee";
  cfg.T = 12;
  cfg.eps = 0.25;
  cfg.replicas = 6;
  cfg.M = 10;
  cfg.seed = 1234;

  fs::path out_a = fs::temp_directory_path() / "bcolab_det_a";
  fs::path out_b = fs::temp_directory_path() / "bcolab_det_b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);

  cfg.out = out_a.string();
  cfg.threads = 1;
  auto run_a = run_bayes_experiment(cfg, false);
  emit_bayes_csv(run_a, cfg);

  cfg.out = out_b.string();
  cfg.threads = 4;
  auto run_b = run_bayes_experiment(cfg, false);
  emit_bayes_csv(run_b, cfg);

  for (int r = 0; r < cfg.replicas; ++r) {
    std::string name = "trace_" + std::to_string(r) + ".csv";
    CHECK(slurp(out_a / name) == slurp(out_b / name));
  }
  CHECK(slurp(out_a / "report.csv") == slurp(out_b / "report.csv"));
  fs::remove_all(out_a);
  fs::remove_all(out_b);
}

TEST_CASE("trace csv round-trips through the reader", "[harness]") {
  ExperimentConfig cfg;
  cfg.kind = "run-bayes";
  cfg.prior = "static-valley";
  cfg.T = 8;
  cfg.eps = 0.3;
  cfg.replicas = 2;
  cfg.M = 6;
  cfg.seed = 5;
  fs::path dir = fs::temp_directory_path() / "bcolab_rt";
  fs::remove_all(dir);
  cfg.out = dir.string();

  auto run = run_bayes_experiment(cfg, false);
  emit_bayes_csv(run, cfg);
  auto rows = read_csv(dir / "trace_0.csv");
  REQUIRE(rows.size() == std::size_t(cfg.T) + 1);
  REQUIRE(rows[0].size() == 11);
  for (int t = 0; t < cfg.T; ++t) {
    const auto& tr = run.episodes[0].trace[std::size_t(t)];
    const auto& row = rows[std::size_t(t) + 1];
    CHECK(std::stoi(row[0]) == tr.t);
    CHECK(std::stod(row[5]) == tr.loss);       // exact: 17 significant digits
    CHECK(std::stod(row[6]) == tr.exp_r);
    CHECK(std::stod(row[9]) == tr.sum_alpha_over_w);
  }
  fs::remove_all(dir);
}

TEST_CASE("exp3 and fullinfo experiments emit reports", "[harness]") {
  fs::path dir = fs::temp_directory_path() / "bcolab_misc";
  fs::remove_all(dir);

  ExperimentConfig cfg;
  cfg.kind = "run-exp3";
  cfg.adversary = "needle";
  cfg.grid = "geometric";
  cfg.T = 500;
  cfg.replicas = 3;
  cfg.seed = 77;
  cfg.out = (dir / "exp3").string();
  auto e = run_exp3_experiment(cfg);
  emit_exp3_csv(e, cfg);
  auto rows = read_csv(dir / "exp3" / "exp3_report.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"replica", "K", "regret", "t23_reference"});

  ExperimentConfig fcfg;
  fcfg.kind = "run-fullinfo";
  fcfg.prior = "pooled";
  fcfg.n = 3;
  fcfg.T = 6;
  fcfg.M = 30;
  fcfg.seed = 2;
  fcfg.out = (dir / "fullinfo").string();
  auto f = run_fullinfo_experiment(fcfg);
  emit_fullinfo_csv(f, fcfg);
  CHECK(f.report.passed());
  auto frows = read_csv(dir / "fullinfo" / "fullinfo.csv");
  REQUIRE(frows.size() == 7);

  fs::remove_all(dir);
}

TEST_CASE("verify-lemma emits per-instance rows and a clean report", "[harness]") {
  fs::path dir = fs::temp_directory_path() / "bcolab_lemma";
  fs::remove_all(dir);
  for (const char* which : {"loc2glob", "l2bound", "logsum", "discretize"}) {
    ExperimentConfig cfg;
    cfg.kind = "verify-lemma";
    cfg.which = which;
    cfg.trials = 300;
    cfg.seed = 4;
    cfg.out = (dir / which).string();
    auto run = run_lemma_experiment(cfg);
    CHECK(run.report.passed());
    CHECK(run.rows > 0);
    CHECK(run.worst_margin >= -kLemmaTol);
    auto rows = read_csv(fs::path(cfg.out) / (std::string("lemma_") + which + ".csv"));
    CHECK(rows.size() == std::size_t(run.rows) + 1);
  }
  fs::remove_all(dir);

  ExperimentConfig cfg;
  cfg.which = "mystery";
  CHECK_THROWS(run_lemma_experiment(cfg));
}

TEST_CASE("run-bayes accepts a prior directory", "[harness]") {
  fs::path dir = fs::temp_directory_path() / "bcolab_prior_dir_run";
  fs::remove_all(dir);
  const double eps = 0.5;  // K = 4
  GridPtr grid = uniform_grid(4);
  save_prior_dir(make_prior("iid-vee", grid, 10, 6, 3), dir / "prior");

  ExperimentConfig cfg;
  cfg.kind = "run-bayes";
  cfg.prior = (dir / "prior").string();
  cfg.T = 10;
  cfg.eps = eps;
  cfg.replicas = 3;
  cfg.seed = 8;
  cfg.out = (dir / "out").string();
  auto run = run_bayes_experiment(cfg, false);
  CHECK(run.report.passed());
  CHECK(run.report.replica_regret.size() == 3);

  cfg.T = 99;  // longer than the stored horizon
  CHECK_THROWS(run_bayes_experiment(cfg, false));
  cfg.T = 10;
  cfg.eps = 0.2;  // K = 25, grid mismatch
  CHECK_THROWS(run_bayes_experiment(cfg, false));
  fs::remove_all(dir);
}

TEST_CASE("grid function csv round-trip", "[harness]") {
  fs::path file = fs::temp_directory_path() / "bcolab_gf.csv";
  Rng rng(23);
  GridFunction f = sample_convex(rng, uniform_grid(17), ConvexFamily::random_slopes());
  save_grid_function(f, file);
  auto rows = read_csv(file);
  REQUIRE(rows.size() == 18);
  CHECK(rows[0] == std::vector<std::string>{"x", "value"});
  GridFunction g = load_grid_function(file);
  CHECK(g.grid->pts == f.grid->pts);
  CHECK(g.values == f.values);
  fs::remove(file);
}

TEST_CASE("run_experiment dispatcher", "[harness]") {
  fs::path dir = fs::temp_directory_path() / "bcolab_dispatch";
  fs::remove_all(dir);
  ExperimentConfig cfg;
  cfg.kind = "run-bayes";
  cfg.prior = "iid-vee";
  cfg.T = 6;
  cfg.eps = 0.4;
  cfg.replicas = 2;
  cfg.M = 5;
  cfg.seed = 9;
  cfg.out = dir.string();
  auto rep = run_experiment(cfg);
  CHECK(rep.passed());
  CHECK(fs::exists(dir / "report.csv"));
  fs::remove_all(dir);

  cfg.kind = "warp-drive";
  CHECK_THROWS(run_experiment(cfg));
}

TEST_CASE("zero rounds produce a header-only trace", "[harness]") {
  fs::path dir = fs::temp_directory_path() / "bcolab_empty";
  fs::remove_all(dir);
  ExperimentConfig cfg;
  cfg.kind = "run-bayes";
  cfg.prior = "static-valley";
  cfg.T = 0;
  cfg.eps = 0.5;
  cfg.replicas = 1;
  cfg.M = 3;
  cfg.seed = 2;
  cfg.out = dir.string();
  auto run = run_bayes_experiment(cfg, false);
  emit_bayes_csv(run, cfg);
  auto rows = read_csv(dir / "trace_0.csv");
  CHECK(rows.size() == 1);  // header only
  fs::remove_all(dir);
}

TEST_CASE("environment thread default", "[harness]") {
  unsetenv("BCO_LAB_THREADS");
  CHECK(env_threads_default() == 1);
  setenv("BCO_LAB_THREADS", "3", 1);
  CHECK(env_threads_default() == 3);
  setenv("BCO_LAB_THREADS", "junk", 1);
  CHECK(env_threads_default() == 1);
  unsetenv("BCO_LAB_THREADS");
}

TEST_CASE("failure counting drives the exit contract", "[harness]") {
  RegretReport rep;
  rep.replica_regret = {1.0, 2.0, 3.0};
  rep.finalize();
  CHECK(rep.mean == Approx(2.0));
  CHECK(rep.stderr_mean == Approx(std::sqrt(1.0 / 3.0)));
  CHECK(rep.passed());
  rep.invariant_failures = 1;
  CHECK_FALSE(rep.passed());
}
