#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "switchsim/policies.hpp"
#include "switchsim/types.hpp"

namespace switchsim {

struct ExperimentConfig {
  std::string policy = "three-phase";  // three-phase | standard-batching | maxweight
  std::vector<std::int64_t> n_list;
  std::string fn_rule = "n";  // "n" or a comma list aligned with n_list
  double c_b = 31.0, c_d = 141.0, c_s = 30.0;
  std::int64_t periods = 1;
  std::vector<std::uint64_t> seeds;
  bool relaxed = false;
  std::string out_dir = ".";
  bool snapshot_period_boundaries = false;

  /// Flat key = value text, '#' comments. Unknown keys are rejected.
  static ExperimentConfig from_file(const std::string& path);

  /// Raw key/value pairs of a config file, before interpretation. Lets the
  /// CLI overlay flag values on top of file values.
  static std::map<std::string, std::string> read_kv(const std::string& path);
  static ExperimentConfig from_kv(const std::map<std::string, std::string>& kv);

  std::int64_t fn_for(std::size_t n_index) const;
  void validate() const;
};

/// Incremental detector for the early-arrival shortfall event: fires if at
/// some in-period slot t in [d, b-1] any queue's batch arrival count is at
/// most (t - d)/n + 1.
class WMonitor {
 public:
  explicit WMonitor(const PolicyParams& p) : params_(p) {}

  /// Call after the arrivals of in-period slot t with the cumulative batch
  /// arrival matrix.
  void observe(std::int64_t t, const CountMatrix& batch_cum);

  int indicator() const { return fired_ ? 1 : 0; }
  void reset() { fired_ = false; }

 private:
  PolicyParams params_;
  bool fired_ = false;
};

/// 1 iff any row or column sum of the completed batch exceeds s.
int monitor_H(const CountMatrix& batch_total, std::int64_t s);

struct PeriodRecord {
  std::int64_t k = 0;
  std::int64_t B = 0;  // backlog at period start
  std::int64_t U = 0;  // newly backlogged during the period
  int W = 0;
  int H = 0;
};

struct MetricsRecord {
  std::int64_t n = 0, f_n = 0;
  std::uint64_t seed = 0;
  PolicyParams params;
  std::vector<std::int64_t> slot_totals;  // total queue at each slot beginning
  std::vector<PeriodRecord> periods;
  std::int64_t wasted_service = 0;
  std::int64_t invariant_violations = 0;
  std::vector<CountMatrix> boundary_snapshots;

  double mean_total_queue() const;
  std::int64_t max_total_queue() const;
  double time_avg_B() const;
  double frac_Uk_pos() const;
  double frac_Wk() const;
  double frac_Hk() const;
};

struct RunOptions {
  /// Test hook: replaces the per-queue arrival probability when >= 0.
  double arrival_rate_override = -1.0;
};

/// One deterministic simulation run. Conservation, class accounting, the
/// backlog recursion and the no-waste implication are checked every slot /
/// period; violations are counted, not thrown.
MetricsRecord run_replication(const ExperimentConfig& cfg, std::int64_t n,
                              std::int64_t f_n, std::uint64_t seed,
                              const RunOptions& opts = {});

struct SweepRow {
  std::int64_t n = 0, f_n = 0;
  std::uint64_t seed = 0;
  double mean_total_queue = 0.0;
  std::int64_t max_total_queue = 0;
  double time_avg_B = 0.0;
  double frac_Uk_pos = 0.0, frac_Wk = 0.0, frac_Hk = 0.0;
  std::int64_t wasted_service = 0;
  std::int64_t bound_3nd = 0;
  double envelope_value = 0.0;  // n^1.5 f_n ln f_n (c = 1)
};

struct PowerLawFit {
  bool ok = false;
  double alpha = 0.0;
  double intercept = 0.0;  // of ln(mean) vs ln(n)
};

/// Least-squares fit of ln(mean) against ln(n). Needs >= 2 distinct n.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

struct SweepSummaryRow {
  std::int64_t n = 0, f_n = 0;
  double mean = 0.0;       // across-seed mean of per-run means
  double std_error = 0.0;  // across seeds
  double max_total = 0.0;
  double envelope_ratio = 0.0;  // mean / envelope
};

struct SweepResult {
  std::vector<SweepRow> rows;           // one per (n, seed), stable order
  std::vector<SweepSummaryRow> summary;  // one per n
  PowerLawFit fit;
};

/// Runs every (n, seed) replication, up to `threads` at a time. Output is
/// independent of the thread count.
SweepResult run_sweep(const ExperimentConfig& cfg, int threads = 1);

/// Plain CSV: header row then data rows. I/O failures throw with the path.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::vector<std::string> sweep_csv_header();
std::vector<std::string> sweep_csv_row(const SweepRow& r);
void write_sweep_csv(const std::string& path, const SweepResult& result);

/// Fixed-format double used in all CSV output.
std::string format_double(double v);

}  // namespace switchsim
