#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "switchsim/clearing.hpp"
#include "switchsim/types.hpp"

namespace switchsim {

/// Timing parameters of the three-phase batching policy. All lengths are in
/// slots; b is the arrival-period length, d the service offset, s the
/// clearing budget anchor, ell = d + s - b the normal-clearing length and
/// r = b - s the backlog-clearing length.
struct PolicyParams {
  std::int64_t n = 0;
  std::int64_t f_n = 0;
  double rho = 0.0;  // 1 - 1/f_n
  double c_b = 0.0, c_d = 0.0, c_s = 0.0;
  std::int64_t b = 0, d = 0, s = 0, ell = 0, r = 0;
  bool constraints_ok = false;
};

/// Raised when the rounded phase lengths do not form a valid partition.
struct ParamInfeasible : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Derives integer phase lengths from the constants:
///   b = ceil(c_b f_n^2 ln f_n), d = ceil(c_d sqrt(n) f_n ln f_n),
///   s = floor(rho b + sqrt(c_s b ln f_n)).
/// Logs are natural; b and d round up, s rounds down. constraints_ok records
/// whether the sufficient conditions c_b > c_s, c_d^2 >= 640 c_b, c_d > c_b,
/// c_s >= 30 hold; when they do not, the result is still returned as long as
/// b > d, ell >= 1 and r >= 1 (relaxed mode). Otherwise ParamInfeasible is
/// thrown naming the failed phase length.
PolicyParams derive_params(std::int64_t n, std::int64_t f_n, double c_b,
                           double c_d, double c_s);

/// Cyclic shift schedule: input i matched to output i + m - 1 (mod n),
/// 1-based m in [1, n]. m = 1 is the identity.
Schedule round_robin_schedule(std::int64_t m, Index n);

enum class Phase { PreService, RoundRobin, NormalClearing, BacklogClearing };

struct PhaseTag {
  std::int64_t period = 0;
  Phase phase = Phase::PreService;
  std::int64_t slot_in_phase = 0;  // 1-based
};

/// Unique (period, phase) containing slot tau >= 1. Slots 1..d, before any
/// service period begins, are the pre-service accumulation of period 0;
/// every later slot falls in exactly one service period.
PhaseTag phase_of(std::int64_t tau, const PolicyParams& p);

/// Greedy maximal matching on the positive entries of q (row-major greedy:
/// no positive cell with both ports free remains). Used for backlog service,
/// where the only requirement is at least one packet per slot.
Schedule backlog_schedule(const CountMatrix& q);

/// Matching maximizing sum of matched queue sizes, ties broken toward the
/// lexicographically smallest 0/1 matrix in row-major order (so zero-size
/// queues are never matched).
Schedule maxweight_schedule(const CountMatrix& q);

/// Maximum matching weight only; exposed for oracle comparisons.
std::int64_t maxweight_value(const CountMatrix& q);

/// Per-queue packet counts split by service class.
struct BatchLedger {
  CountMatrix backlog;     // unserved remainders of past batches
  CountMatrix batch_cur;   // the batch currently being served
  CountMatrix batch_next;  // the batch currently arriving
  std::int64_t k = 0;      // current service-period index

  static BatchLedger empty(Index n);
  CountMatrix total() const { return backlog + batch_cur + batch_next; }
};

/// A slot decision: the schedule plus the packet class it may serve
/// (nullptr = any queued packet).
struct Decision {
  Schedule schedule;
  CountMatrix* eligible = nullptr;
};

struct PeriodStats {
  std::int64_t k = 0;
  std::int64_t backlog_at_start = 0;  // B_k
  std::int64_t newly_backlogged = 0;  // U_k
};

/// The three-phase batching policy. Drive it one slot at a time:
/// decide(tau) before mid-slot service, then route_arrivals(tau, a) with the
/// slot's arrival matrix.
class ThreePhasePolicy {
 public:
  explicit ThreePhasePolicy(const PolicyParams& p);

  Decision decide(std::int64_t tau);
  void route_arrivals(std::int64_t tau, const CountMatrix& arrivals);

  const BatchLedger& ledger() const { return ledger_; }
  const std::vector<PeriodStats>& period_stats() const { return stats_; }

 private:
  PolicyParams params_;
  BatchLedger ledger_;
  std::vector<PeriodStats> stats_;
  ClearancePlan plan_;
  std::size_t plan_block_ = 0;
  std::int64_t plan_block_pos_ = 0;
  Schedule next_plan_schedule();
};

/// Simplified standard batching baseline: a batch is served only after it
/// has fully arrived, drained by an optimal clearing plan over the next
/// arrival period; leftover packets join the backlog, which is served in
/// drain slots the plan does not need.
class StandardBatchingPolicy {
 public:
  explicit StandardBatchingPolicy(const PolicyParams& p);

  Decision decide(std::int64_t tau);
  void route_arrivals(std::int64_t tau, const CountMatrix& arrivals);

  const BatchLedger& ledger() const { return ledger_; }
  const std::vector<PeriodStats>& period_stats() const { return stats_; }

 private:
  PolicyParams params_;
  BatchLedger ledger_;
  std::vector<PeriodStats> stats_;
  ClearancePlan plan_;
  std::size_t plan_block_ = 0;
  std::int64_t plan_block_pos_ = 0;
  Schedule next_plan_schedule();
};

}  // namespace switchsim
