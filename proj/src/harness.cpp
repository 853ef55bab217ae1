#include "switchsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "switchsim/bounds.hpp"
#include "switchsim/switch_core.hpp"

namespace switchsim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
std::vector<T> parse_list(const std::string& value, const std::string& key) {
  std::vector<T> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      if constexpr (std::is_same_v<T, std::uint64_t>) {
        out.push_back(std::stoull(item));
      } else {
        out.push_back(std::stoll(item));
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("config key '" + key + "': bad entry '" +
                                  item + "'");
    }
  }
  return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("config key '" + key + "': expected a boolean");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_kv(
    const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "policy") {
      cfg.policy = value;
    } else if (key == "n_list") {
      cfg.n_list = parse_list<std::int64_t>(value, key);
    } else if (key == "fn_rule") {
      cfg.fn_rule = value;
    } else if (key == "c_b") {
      cfg.c_b = std::stod(value);
    } else if (key == "c_d") {
      cfg.c_d = std::stod(value);
    } else if (key == "c_s") {
      cfg.c_s = std::stod(value);
    } else if (key == "periods") {
      cfg.periods = std::stoll(value);
    } else if (key == "seeds") {
      cfg.seeds = parse_list<std::uint64_t>(value, key);
    } else if (key == "relaxed") {
      cfg.relaxed = parse_bool(value, key);
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else if (key == "snapshot_period_boundaries") {
      cfg.snapshot_period_boundaries = parse_bool(value, key);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::map<std::string, std::string> ExperimentConfig::read_kv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_kv(read_kv(path));
}

void ExperimentConfig::validate() const {
  if (n_list.empty()) throw std::invalid_argument("n_list must be nonempty");
  if (seeds.empty()) throw std::invalid_argument("seeds must be nonempty");
  if (periods < 1) throw std::invalid_argument("periods must be >= 1");
  if (policy != "three-phase" && policy != "standard-batching" &&
      policy != "maxweight") {
    throw std::invalid_argument("unknown policy '" + policy + "'");
  }
  if (fn_rule != "n") {
    const auto fns = parse_list<std::int64_t>(fn_rule, "fn_rule");
    if (fns.size() != n_list.size()) {
      throw std::invalid_argument("fn_rule list must match n_list length");
    }
    for (std::size_t i = 0; i < fns.size(); ++i) {
      if (fns[i] < n_list[i]) {
        throw std::invalid_argument("fn_rule: every f_n must satisfy f_n >= n");
      }
    }
  }
}

std::int64_t ExperimentConfig::fn_for(std::size_t n_index) const {
  if (fn_rule == "n") return n_list.at(n_index);
  return parse_list<std::int64_t>(fn_rule, "fn_rule").at(n_index);
}

void WMonitor::observe(std::int64_t t, const CountMatrix& batch_cum) {
  if (fired_ || t < params_.d || t > params_.b - 1) return;
  // Exists (i,j) with A <= (t-d)/n + 1, i.e. n*A <= t - d + n.
  if (params_.n * batch_cum.minCoeff() <= t - params_.d + params_.n) {
    fired_ = true;
  }
}

int monitor_H(const CountMatrix& batch_total, std::int64_t s) {
  const bool over = (batch_total.rowwise().sum().array() > s).any() ||
                    (batch_total.colwise().sum().array() > s).any();
  return over ? 1 : 0;
}

double MetricsRecord::mean_total_queue() const {
  if (slot_totals.empty()) return 0.0;
  const double sum = std::accumulate(slot_totals.begin(), slot_totals.end(),
                                     0.0);
  return sum / static_cast<double>(slot_totals.size());
}

std::int64_t MetricsRecord::max_total_queue() const {
  if (slot_totals.empty()) return 0;
  return *std::max_element(slot_totals.begin(), slot_totals.end());
}

double MetricsRecord::time_avg_B() const {
  if (periods.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : periods) sum += static_cast<double>(p.B);
  return sum / static_cast<double>(periods.size());
}

double MetricsRecord::frac_Uk_pos() const {
  if (periods.empty()) return 0.0;
  std::int64_t c = 0;
  for (const auto& p : periods) c += (p.U > 0);
  return static_cast<double>(c) / static_cast<double>(periods.size());
}

double MetricsRecord::frac_Wk() const {
  if (periods.empty()) return 0.0;
  std::int64_t c = 0;
  for (const auto& p : periods) c += p.W;
  return static_cast<double>(c) / static_cast<double>(periods.size());
}

double MetricsRecord::frac_Hk() const {
  if (periods.empty()) return 0.0;
  std::int64_t c = 0;
  for (const auto& p : periods) c += p.H;
  return static_cast<double>(c) / static_cast<double>(periods.size());
}

namespace {

// Uniform per-slot interface over the three policies.
struct PolicyDriver {
  virtual ~PolicyDriver() = default;
  virtual Decision decide(std::int64_t tau) = 0;
  virtual void route_arrivals(std::int64_t tau, const CountMatrix& a) = 0;
  virtual const BatchLedger* ledger() const { return nullptr; }
  virtual const std::vector<PeriodStats>* stats() const { return nullptr; }
  virtual bool has_backlog_recursion() const { return false; }
};

struct ThreePhaseDriver : PolicyDriver {
  ThreePhasePolicy policy;
  explicit ThreePhaseDriver(const PolicyParams& p) : policy(p) {}
  Decision decide(std::int64_t tau) override { return policy.decide(tau); }
  void route_arrivals(std::int64_t tau, const CountMatrix& a) override {
    policy.route_arrivals(tau, a);
  }
  const BatchLedger* ledger() const override { return &policy.ledger(); }
  const std::vector<PeriodStats>* stats() const override {
    return &policy.period_stats();
  }
  bool has_backlog_recursion() const override { return true; }
};

struct StandardBatchingDriver : PolicyDriver {
  StandardBatchingPolicy policy;
  explicit StandardBatchingDriver(const PolicyParams& p) : policy(p) {}
  Decision decide(std::int64_t tau) override { return policy.decide(tau); }
  void route_arrivals(std::int64_t tau, const CountMatrix& a) override {
    policy.route_arrivals(tau, a);
  }
  const BatchLedger* ledger() const override { return &policy.ledger(); }
  const std::vector<PeriodStats>* stats() const override {
    return &policy.period_stats();
  }
};

struct MaxWeightDriver : PolicyDriver {
  const SwitchState& state;
  explicit MaxWeightDriver(const SwitchState& s) : state(s) {}
  Decision decide(std::int64_t) override {
    return {maxweight_schedule(state.queues), nullptr};
  }
  void route_arrivals(std::int64_t, const CountMatrix&) override {}
};

}  // namespace

MetricsRecord run_replication(const ExperimentConfig& cfg, std::int64_t n,
                              std::int64_t f_n, std::uint64_t seed,
                              const RunOptions& opts) {
  const PolicyParams params = derive_params(n, f_n, cfg.c_b, cfg.c_d, cfg.c_s);
  if (!params.constraints_ok && !cfg.relaxed) {
    throw ParamInfeasible(
        "constants fail the sufficient conditions; rerun with relaxed = true");
  }

  MetricsRecord rec;
  rec.n = n;
  rec.f_n = f_n;
  rec.seed = seed;
  rec.params = params;

  SwitchState state = SwitchState::empty(n);
  std::unique_ptr<PolicyDriver> driver;
  if (cfg.policy == "three-phase") {
    driver = std::make_unique<ThreePhaseDriver>(params);
  } else if (cfg.policy == "standard-batching") {
    driver = std::make_unique<StandardBatchingDriver>(params);
  } else {
    driver = std::make_unique<MaxWeightDriver>(state);
  }

  ArrivalConfig arr = ArrivalConfig::make(n, params.rho, seed);
  if (opts.arrival_rate_override >= 0.0) {
    arr.per_queue_rate = opts.arrival_rate_override;
  }
  Rng rng(derive_stream_seed(seed, n, f_n));

  const std::int64_t T = cfg.periods * params.b + params.d;
  rec.slot_totals.reserve(static_cast<std::size_t>(T));

  WMonitor wmon(params);
  CountMatrix batch_arr = CountMatrix::Zero(n, n);
  std::vector<int> w_ind, h_ind;

  for (std::int64_t tau = 1; tau <= T; ++tau) {
    rec.slot_totals.push_back(state.queues.sum());

    const Decision dec = driver->decide(tau);
    const std::int64_t served = apply_schedule(state, dec.schedule,
                                               dec.eligible);
    if (served > n) ++rec.invariant_violations;

    const CountMatrix a = gen_arrivals(arr, rng);
    state.cum_arrivals += a;
    state.queues += a;
    driver->route_arrivals(tau, a);
    batch_arr += a;

    // In-period slot index of the current arrival period.
    const std::int64_t t = tau - ((tau - 1) / params.b) * params.b;
    wmon.observe(t, batch_arr);
    if (t == params.b) {
      w_ind.push_back(wmon.indicator());
      h_ind.push_back(monitor_H(batch_arr, params.s));
      if (cfg.snapshot_period_boundaries) {
        rec.boundary_snapshots.push_back(state.queues);
      }
      batch_arr.setZero();
      wmon.reset();
    }

    if (!state.conservation_holds()) ++rec.invariant_violations;
    if (const BatchLedger* led = driver->ledger()) {
      if (led->total() != state.queues) ++rec.invariant_violations;
    }
  }
  rec.wasted_service = state.wasted_service;

  // Merge per-period policy stats with the arrival-side event indicators.
  if (const std::vector<PeriodStats>* stats = driver->stats()) {
    const std::size_t count =
        std::min(stats->size(), std::min(w_ind.size(), h_ind.size()));
    for (std::size_t k = 0; k < count; ++k) {
      const PeriodStats& ps = (*stats)[k];
      PeriodRecord pr;
      pr.k = ps.k;
      pr.B = ps.backlog_at_start;
      pr.U = ps.newly_backlogged;
      pr.W = w_ind[k];
      pr.H = h_ind[k];
      rec.periods.push_back(pr);

      if (pr.U > params.n * params.n * params.b) ++rec.invariant_violations;
      if (pr.W == 0 && pr.H == 0 && pr.U != 0) ++rec.invariant_violations;
    }
    if (driver->has_backlog_recursion()) {
      for (std::size_t k = 0; k + 1 < rec.periods.size(); ++k) {
        const std::int64_t cap = std::max<std::int64_t>(
            0, rec.periods[k].B + rec.periods[k].U - params.r);
        if (rec.periods[k + 1].B > cap) ++rec.invariant_violations;
      }
    }
  } else {
    // Queue-state policies have no batch ledger; record the arrival events.
    const std::size_t count = std::min(w_ind.size(), h_ind.size());
    for (std::size_t k = 0; k < count; ++k) {
      rec.periods.push_back(
          {static_cast<std::int64_t>(k), 0, 0, w_ind[k], h_ind[k]});
    }
  }
  return rec;
}

PowerLawFit fit_power_law(
    const std::vector<std::pair<double, double>>& points) {
  PowerLawFit fit;
  std::vector<std::pair<double, double>> logs;
  for (const auto& [x, y] : points) {
    if (x > 0.0 && y > 0.0) logs.emplace_back(std::log(x), std::log(y));
  }
  if (logs.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : logs) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(logs.size());
  const double denom = m * sxx - sx * sx;
  if (denom <= 0.0) return fit;
  fit.alpha = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.alpha * sx) / m;
  fit.ok = true;
  return fit;
}

SweepResult run_sweep(const ExperimentConfig& cfg, int threads) {
  struct Job {
    std::size_t n_index;
    std::size_t seed_index;
  };
  std::vector<Job> jobs;
  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
      jobs.push_back({ni, si});
    }
  }
  std::vector<SweepRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mu;

  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size() || failed.load()) break;
      const Job job = jobs[idx];
      const std::int64_t n = cfg.n_list[job.n_index];
      const std::int64_t f_n = cfg.fn_for(job.n_index);
      const std::uint64_t seed = cfg.seeds[job.seed_index];
      try {
        const MetricsRecord rec = run_replication(cfg, n, f_n, seed);
        SweepRow& row = rows[idx];
        row.n = n;
        row.f_n = f_n;
        row.seed = seed;
        row.mean_total_queue = rec.mean_total_queue();
        row.max_total_queue = rec.max_total_queue();
        row.time_avg_B = rec.time_avg_B();
        row.frac_Uk_pos = rec.frac_Uk_pos();
        row.frac_Wk = rec.frac_Wk();
        row.frac_Hk = rec.frac_Hk();
        row.wasted_service = rec.wasted_service;
        row.bound_3nd = total_queue_bound(n, rec.params.d);
        row.envelope_value = theorem1_envelope(n, f_n, 1.0);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mu);
        error = e.what();
        failed.store(true);
        break;
      }
    }
  };

  const int width = std::max(1, threads);
  if (width == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < width; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw std::runtime_error(error);

  SweepResult result;
  result.rows = std::move(rows);

  // Across-seed summary per n, in n_list order.
  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    SweepSummaryRow s;
    s.n = cfg.n_list[ni];
    s.f_n = cfg.fn_for(ni);
    std::vector<double> means;
    double max_total = 0.0;
    for (const SweepRow& row : result.rows) {
      if (row.n != s.n || row.f_n != s.f_n) continue;
      means.push_back(row.mean_total_queue);
      max_total = std::max(max_total,
                           static_cast<double>(row.max_total_queue));
    }
    const double m = static_cast<double>(means.size());
    s.mean = std::accumulate(means.begin(), means.end(), 0.0) / m;
    if (means.size() > 1) {
      double var = 0.0;
      for (double v : means) var += (v - s.mean) * (v - s.mean);
      var /= (m - 1.0);
      s.std_error = std::sqrt(var / m);
    }
    s.max_total = max_total;
    const double env = theorem1_envelope(s.n, s.f_n, 1.0);
    s.envelope_ratio = env > 0.0 ? s.mean / env : 0.0;
    result.summary.push_back(s);
  }

  std::vector<std::pair<double, double>> points;
  for (const auto& s : result.summary) {
    points.emplace_back(static_cast<double>(s.n), s.mean);
  }
  result.fit = fit_power_law(points);
  return result;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> sweep_csv_header() {
  return {"n",        "f_n",        "seed",          "mean_total_queue",
          "max_total_queue", "time_avg_B", "frac_Uk_pos",  "frac_Wk",
          "frac_Hk",  "wasted_service", "bound_3nd",  "envelope_value"};
}

std::vector<std::string> sweep_csv_row(const SweepRow& r) {
  return {std::to_string(r.n),
          std::to_string(r.f_n),
          std::to_string(r.seed),
          format_double(r.mean_total_queue),
          std::to_string(r.max_total_queue),
          format_double(r.time_avg_B),
          format_double(r.frac_Uk_pos),
          format_double(r.frac_Wk),
          format_double(r.frac_Hk),
          std::to_string(r.wasted_service),
          std::to_string(r.bound_3nd),
          format_double(r.envelope_value)};
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(result.rows.size());
  for (const SweepRow& r : result.rows) rows.push_back(sweep_csv_row(r));
  write_csv(path, sweep_csv_header(), rows);
}

}  // namespace switchsim
