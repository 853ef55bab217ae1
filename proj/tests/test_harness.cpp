#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "switchsim/harness.hpp"
#include "switchsim/policies.hpp"

using namespace switchsim;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = std::string("harness_") + name + ".txt";
  std::ofstream out(path);
  out << body;
  return path;
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.policy = "three-phase";
  cfg.n_list = {4};
  cfg.fn_rule = "n";
  cfg.c_b = 2.0;
  cfg.c_d = 1.0;
  cfg.c_s = 0.5;
  cfg.periods = 3;
  cfg.seeds = {1, 2};
  cfg.relaxed = true;
  return cfg;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("round trip through a file") {
    const std::string path = write_temp(
        "ok",
        "# comment\n"
        "policy = three-phase\n"
        "n_list = 4, 8\n"
        "fn_rule = n\n"
        "c_b = 2\n"
        "c_d = 1\n"
        "c_s = 0.5\n"
        "periods = 3\n"
        "seeds = 7, 8, 9\n"
        "relaxed = true\n"
        "out_dir = /tmp/x\n"
        "snapshot_period_boundaries = false\n");
    const ExperimentConfig cfg = ExperimentConfig::from_file(path);
    CHECK(cfg.policy == "three-phase");
    CHECK(cfg.n_list == std::vector<std::int64_t>{4, 8});
    CHECK(cfg.c_s == doctest::Approx(0.5));
    CHECK(cfg.periods == 3);
    CHECK(cfg.seeds.size() == 3);
    CHECK(cfg.relaxed);
    CHECK(cfg.out_dir == "/tmp/x");
    CHECK(cfg.fn_for(0) == 4);
    CHECK(cfg.fn_for(1) == 8);
    std::remove(path.c_str());
  }
  SUBCASE("explicit fn list") {
    ExperimentConfig cfg = tiny_config();
    cfg.n_list = {4, 8};
    cfg.fn_rule = "8,16";
    cfg.validate();
    CHECK(cfg.fn_for(0) == 8);
    CHECK(cfg.fn_for(1) == 16);
  }
  SUBCASE("unknown key rejected") {
    const std::string path = write_temp("bad", "polcy = x\n");
    CHECK_THROWS_AS(ExperimentConfig::from_file(path), std::invalid_argument);
    std::remove(path.c_str());
  }
  SUBCASE("missing file rejected") {
    CHECK_THROWS_AS(ExperimentConfig::from_file("no_such_file_anywhere.txt"),
                    std::invalid_argument);
  }
  SUBCASE("validate catches bad values") {
    ExperimentConfig cfg = tiny_config();
    cfg.policy = "bogus";
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.n_list.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = tiny_config();
    cfg.fn_rule = "8";  // length mismatch only surfaces with two n values
    cfg.n_list = {4, 8};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}

TEST_CASE("WMonitor") {
  PolicyParams p;
  p.n = 2;
  p.b = 20;
  p.d = 6;
  SUBCASE("zero arrivals fire at t = d") {
    WMonitor w(p);
    w.observe(p.d, CountMatrix::Zero(2, 2));
    CHECK(w.indicator() == 1);
  }
  SUBCASE("saturated arrivals never fire") {
    WMonitor w(p);
    for (std::int64_t t = p.d; t < p.b; ++t) {
      // every queue has t arrivals by slot t: n*t > t - d + n for t > d... and
      // at t = d, n*d = 12 > n = 2... strictly above the threshold.
      w.observe(t, CountMatrix::Constant(2, 2, t));
      REQUIRE(w.indicator() == 0);
    }
  }
  SUBCASE("boundary case: n*A == t - d + n fires") {
    WMonitor w(p);
    // t = d + n: threshold is t - d + n = 2n, so A = 2 is exactly at it.
    w.observe(p.d + 2, CountMatrix::Constant(2, 2, 2));
    CHECK(w.indicator() == 1);
  }
  SUBCASE("out-of-window slots are ignored") {
    WMonitor w(p);
    w.observe(p.d - 1, CountMatrix::Zero(2, 2));
    w.observe(p.b, CountMatrix::Zero(2, 2));
    CHECK(w.indicator() == 0);
    w.reset();
    CHECK(w.indicator() == 0);
  }
}

TEST_CASE("monitor_H") {
  CountMatrix q(2, 2);
  q << 3, 0, 0, 3;
  CHECK(monitor_H(q, 3) == 0);
  CHECK(monitor_H(q, 2) == 1);
  q(0, 1) = 1;  // row 0 sum = 4
  CHECK(monitor_H(q, 3) == 1);
}

TEST_CASE("run_replication basics") {
  const ExperimentConfig cfg = tiny_config();
  SUBCASE("zero arrival override keeps the switch empty") {
    RunOptions opts;
    opts.arrival_rate_override = 0.0;
    const MetricsRecord rec = run_replication(cfg, 4, 4, 1, opts);
    CHECK(rec.invariant_violations == 0);
    CHECK(rec.max_total_queue() == 0);
    for (const PeriodRecord& pr : rec.periods) {
      CHECK(pr.B == 0);
      CHECK(pr.U == 0);
      CHECK(pr.W == 1);  // no arrivals certainly under-fills the batch
      CHECK(pr.H == 0);
    }
  }
  SUBCASE("deterministic across repeated runs") {
    const MetricsRecord a = run_replication(cfg, 4, 4, 7);
    const MetricsRecord b = run_replication(cfg, 4, 4, 7);
    CHECK(a.slot_totals == b.slot_totals);
    CHECK(a.mean_total_queue() == b.mean_total_queue());
    CHECK(a.wasted_service == b.wasted_service);
    REQUIRE(a.periods.size() == b.periods.size());
    CHECK(a.periods.size() == 3);
    for (std::size_t i = 0; i < a.periods.size(); ++i) {
      CHECK(a.periods[i].B == b.periods[i].B);
      CHECK(a.periods[i].U == b.periods[i].U);
    }
  }
  SUBCASE("invariants hold on every supported policy") {
    for (const char* policy :
         {"three-phase", "standard-batching", "maxweight"}) {
      ExperimentConfig c = tiny_config();
      c.policy = policy;
      const MetricsRecord rec = run_replication(c, 4, 4, 3);
      REQUIRE(rec.invariant_violations == 0);
      REQUIRE(!rec.slot_totals.empty());
      CHECK(rec.slot_totals.front() == 0);  // starts empty
    }
  }
  SUBCASE("strict constants rejected without relaxed flag") {
    ExperimentConfig c = tiny_config();
    c.relaxed = false;
    CHECK_THROWS_AS(run_replication(c, 4, 4, 1), ParamInfeasible);
  }
  SUBCASE("boundary snapshots recorded when requested") {
    ExperimentConfig c = tiny_config();
    c.snapshot_period_boundaries = true;
    const MetricsRecord rec = run_replication(c, 4, 4, 1);
    CHECK(rec.boundary_snapshots.size() == static_cast<std::size_t>(c.periods));
    for (const CountMatrix& m : rec.boundary_snapshots) {
      CHECK(m.rows() == 4);
      CHECK((m.array() >= 0).all());
    }
  }
}

TEST_CASE("fit_power_law") {
  SUBCASE("exact power law recovered") {
    std::vector<std::pair<double, double>> pts;
    for (const double n : {8.0, 16.0, 32.0, 64.0}) {
      pts.emplace_back(n, 2.5 * std::pow(n, 2.5));
    }
    const PowerLawFit fit = fit_power_law(pts);
    REQUIRE(fit.ok);
    CHECK(fit.alpha == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(std::exp(fit.intercept) == doctest::Approx(2.5).epsilon(1e-9));
  }
  SUBCASE("constant data gives zero slope") {
    const PowerLawFit fit = fit_power_law({{8.0, 5.0}, {16.0, 5.0}, {32.0, 5.0}});
    REQUIRE(fit.ok);
    CHECK(fit.alpha == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("degenerate inputs flagged") {
    CHECK_FALSE(fit_power_law({}).ok);
    CHECK_FALSE(fit_power_law({{8.0, 5.0}}).ok);
    CHECK_FALSE(fit_power_law({{8.0, 5.0}, {8.0, 6.0}}).ok);
  }
}

TEST_CASE("run_sweep is thread-count independent") {
  ExperimentConfig cfg = tiny_config();
  cfg.periods = 2;
  cfg.seeds = {1, 2, 3};
  const SweepResult one = run_sweep(cfg, 1);
  const SweepResult four = run_sweep(cfg, 4);
  REQUIRE(one.rows.size() == four.rows.size());
  REQUIRE(one.rows.size() == 3);
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(sweep_csv_row(one.rows[i]) == sweep_csv_row(four.rows[i]));
  }
  REQUIRE(one.summary.size() == 1);
  CHECK(one.summary[0].n == 4);
  CHECK(one.summary[0].mean == doctest::Approx(four.summary[0].mean));
}

TEST_CASE("csv writing") {
  const std::string path = "harness_csv_test.csv";
  write_csv(path, {"a", "b"}, {{"1", "2"}, {"3", "4"}});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "a,b");
  std::getline(in, line);
  CHECK(line == "1,2");
  std::getline(in, line);
  CHECK(line == "3,4");
  in.close();
  std::remove(path.c_str());
  CHECK_THROWS(write_csv("/no/such/dir/x.csv", {"a"}, {}));

  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1234567.0) == "1234567");
  CHECK(sweep_csv_header().size() == 12);
}
