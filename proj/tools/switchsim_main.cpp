#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "switchsim/bounds.hpp"
#include "switchsim/clearing.hpp"
#include "switchsim/harness.hpp"
#include "switchsim/policies.hpp"
#include "switchsim/types.hpp"

namespace {

using namespace switchsim;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> overrides;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--config", config_path, "config file (key = value lines)");
    for (const char* key :
         {"policy", "n_list", "fn_rule", "c_b", "c_d", "c_s", "periods",
          "seeds", "relaxed", "out_dir", "snapshot_period_boundaries"}) {
      cmd.add_option_function<std::string>(
          std::string("--") + key,
          [this, key](const std::string& v) { overrides[key] = v; },
          std::string("overrides config key ") + key);
    }
  }

  ExperimentConfig resolve() const {
    std::map<std::string, std::string> kv;
    if (!config_path.empty()) kv = ExperimentConfig::read_kv(config_path);
    for (const auto& [k, v] : overrides) kv[k] = v;
    return ExperimentConfig::from_kv(kv);
  }
};

void print_schedule_line(std::ostream& out, const Schedule& s) {
  // Matched output port per input, 1-based, 0 when idle.
  for (Index i = 0; i < s.ports(); ++i) {
    if (i > 0) out << ' ';
    out << (s.matched(i) >= 0 ? s.matched(i) + 1 : 0);
  }
  out << '\n';
}

int cmd_simulate(const ConfigFlags& flags) {
  const ExperimentConfig cfg = flags.resolve();
  std::filesystem::create_directories(cfg.out_dir);
  bool any_violation = false;

  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const std::int64_t n = cfg.n_list[ni];
    const std::int64_t f_n = cfg.fn_for(ni);
    for (const std::uint64_t seed : cfg.seeds) {
      const MetricsRecord rec = run_replication(cfg, n, f_n, seed);
      const std::string stem = cfg.out_dir + "/sim_n" + std::to_string(n) +
                               "_fn" + std::to_string(f_n) + "_seed" +
                               std::to_string(seed);

      std::vector<std::vector<std::string>> period_rows;
      for (const PeriodRecord& p : rec.periods) {
        period_rows.push_back({std::to_string(p.k), std::to_string(p.B),
                               std::to_string(p.U), std::to_string(p.W),
                               std::to_string(p.H)});
      }
      write_csv(stem + "_periods.csv", {"k", "B_k", "U_k", "W_k", "H_k"},
                period_rows);

      std::vector<std::vector<std::string>> slot_rows;
      slot_rows.reserve(rec.slot_totals.size());
      for (std::size_t t = 0; t < rec.slot_totals.size(); ++t) {
        slot_rows.push_back({std::to_string(t + 1),
                             std::to_string(rec.slot_totals[t])});
      }
      write_csv(stem + "_slots.csv", {"tau", "total_queue"}, slot_rows);

      for (std::size_t k = 0; k < rec.boundary_snapshots.size(); ++k) {
        std::ofstream snap(stem + "_snapshot_k" + std::to_string(k) + ".txt");
        snap << format_queue_matrix(rec.boundary_snapshots[k]);
      }

      const bool violated = rec.invariant_violations > 0;
      any_violation = any_violation || violated;
      std::cout << "n=" << n << " f_n=" << f_n << " seed=" << seed
                << " mean_total_queue=" << format_double(rec.mean_total_queue())
                << " max_total_queue=" << rec.max_total_queue()
                << " bound_3nd=" << total_queue_bound(n, rec.params.d)
                << " frac_Uk_pos=" << format_double(rec.frac_Uk_pos())
                << " wasted_service=" << rec.wasted_service
                << " invariants=" << (violated ? "VIOLATED" : "ok") << '\n';
    }
  }
  return any_violation ? kExitRuntime : kExitOk;
}

int cmd_sweep(const ConfigFlags& flags, int threads,
              const std::string& out_file) {
  const ExperimentConfig cfg = flags.resolve();
  std::filesystem::create_directories(cfg.out_dir);
  const SweepResult result = run_sweep(cfg, threads);
  const std::string path =
      out_file.empty() ? cfg.out_dir + "/sweep.csv" : out_file;
  write_sweep_csv(path, result);

  std::cout << "wrote " << path << '\n';
  for (const SweepSummaryRow& s : result.summary) {
    std::cout << "n=" << s.n << " f_n=" << s.f_n
              << " mean=" << format_double(s.mean)
              << " stderr=" << format_double(s.std_error)
              << " max=" << format_double(s.max_total)
              << " mean/envelope=" << format_double(s.envelope_ratio) << '\n';
  }
  if (result.fit.ok) {
    std::cout << "power-law fit: alpha=" << format_double(result.fit.alpha)
              << " intercept=" << format_double(result.fit.intercept) << '\n';
  } else {
    std::cout << "power-law fit omitted: needs >= 2 distinct n values\n";
  }
  return kExitOk;
}

int cmd_clear(const std::string& matrix_file, bool verify) {
  std::ifstream in(matrix_file);
  if (!in) {
    std::cerr << "cannot open matrix file: " << matrix_file << '\n';
    return kExitUsage;
  }
  const CountMatrix q = parse_queue_matrix(in);
  const ClearancePlan plan = clearing_plan(q);
  std::cout << "L = " << plan.length << '\n';
  for (const ClearancePlan::Block& b : plan.blocks) {
    for (std::int64_t c = 0; c < b.count; ++c) {
      print_schedule_line(std::cout, b.schedule);
    }
  }
  if (verify) {
    const std::int64_t residual = replay_plan(q, plan, plan.length).sum();
    std::cout << "residual " << residual << '\n';
    if (residual != 0) return kExitRuntime;
  }
  return kExitOk;
}

int cmd_bounds(std::int64_t n, std::int64_t f_n, double c_b, double c_d,
               double c_s) {
  const PolicyParams p = derive_params(n, f_n, c_b, c_d, c_s);
  const double fd = static_cast<double>(f_n);
  std::cout << "n = " << p.n << ", f_n = " << p.f_n
            << ", rho = " << format_double(p.rho) << '\n'
            << "b = " << p.b << ", d = " << p.d << ", s = " << p.s
            << ", ell = " << p.ell << ", r = " << p.r << '\n'
            << "constraints_ok = " << (p.constraints_ok ? "true" : "false")
            << '\n'
            << "total_queue_bound (3nd)   = " << total_queue_bound(p.n, p.d)
            << '\n'
            << "scaling envelope (c = 1)  = "
            << format_double(theorem1_envelope(n, f_n, 1.0)) << '\n'
            << "event prob bound W, H     = "
            << format_double(0.5 * std::pow(fd, -13.0)) << " each\n"
            << "backlog expectation bound = "
            << format_double(kingman_bound(
                   {std::pow(fd, -7.0), 1.0 / fd, 1.0, 1.0}))
            << '\n';
  return kExitOk;
}

int cmd_validate_params(std::int64_t n, std::int64_t f_n, double c_b,
                        double c_d, double c_s) {
  std::cout << "n = " << n << ", f_n = " << f_n << ", c_b = " << c_b
            << ", c_d = " << c_d << ", c_s = " << c_s << '\n';
  const double fd = static_cast<double>(f_n);
  const double lf = std::log(fd);
  const double c_r = c_b - std::sqrt(c_s * c_b);
  const double c_ell = c_d - c_r;
  try {
    const PolicyParams p = derive_params(n, f_n, c_b, c_d, c_s);
    std::cout << "b = " << p.b << ", d = " << p.d << ", s = " << p.s
              << ", ell = " << p.ell << ", r = " << p.r << '\n'
              << "constraints_ok = " << (p.constraints_ok ? "true" : "false")
              << '\n'
              << "cross-check: r ~ c_r f_n ln f_n = "
              << format_double(c_r * fd * lf) << " (c_r = "
              << format_double(c_r) << ")\n"
              << "cross-check: ell >= c_ell sqrt(n) f_n ln f_n = "
              << format_double(c_ell * std::sqrt(static_cast<double>(n)) * fd *
                               lf)
              << " (c_ell = " << format_double(c_ell) << ")\n"
              << "verdict: feasible\n";
  } catch (const ParamInfeasible& e) {
    std::cout << "cross-check: c_r = " << format_double(c_r)
              << ", c_ell = " << format_double(c_ell) << '\n'
              << "verdict: " << e.what() << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"n x n input-queued switch simulator and analysis toolkit"};
  app.require_subcommand(1);

  ConfigFlags sim_flags;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "run replications, write metrics CSVs, print summaries");
  sim_flags.add_to(*simulate);

  ConfigFlags sweep_flags;
  int sweep_threads = 1;
  std::string sweep_out;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "scaling sweep over n with power-law fit, write sweep CSV");
  sweep_flags.add_to(*sweep);
  sweep->add_option("--threads", sweep_threads, "parallel replication width");
  sweep->add_option("--out", sweep_out, "sweep CSV path (default out_dir/sweep.csv)");

  std::string matrix_file;
  bool verify = false;
  CLI::App* clear = app.add_subcommand(
      "clear", "minimum clearance time and schedule sequence for a matrix");
  clear->add_option("matrix", matrix_file, "queue matrix file (csv rows)")
      ->required();
  clear->add_flag("--verify", verify, "replay the plan and report residual");

  std::int64_t arg_n = 0, arg_fn = 0;
  double arg_cb = 31.0, arg_cd = 141.0, arg_cs = 30.0;
  CLI::App* bounds = app.add_subcommand(
      "bounds", "analytical bound values for a parameter set");
  CLI::App* validate = app.add_subcommand(
      "validate-params", "derive phase lengths and report feasibility");
  for (CLI::App* cmd : {bounds, validate}) {
    cmd->add_option("--n", arg_n, "port count")->required();
    cmd->add_option("--f_n", arg_fn, "gap parameter (rho = 1 - 1/f_n)")
        ->required();
    cmd->add_option("--c_b", arg_cb, "arrival-period constant");
    cmd->add_option("--c_d", arg_cd, "service-offset constant");
    cmd->add_option("--c_s", arg_cs, "clearing-anchor constant");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(sim_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, sweep_threads, sweep_out);
    if (clear->parsed()) return cmd_clear(matrix_file, verify);
    if (bounds->parsed()) {
      return cmd_bounds(arg_n, arg_fn, arg_cb, arg_cd, arg_cs);
    }
    if (validate->parsed()) {
      return cmd_validate_params(arg_n, arg_fn, arg_cb, arg_cd, arg_cs);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
