#include "switchsim/policies.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace switchsim {

PolicyParams derive_params(std::int64_t n, std::int64_t f_n, double c_b,
                           double c_d, double c_s) {
  if (n < 1 || f_n < n) {
    throw std::invalid_argument("need f_n >= n >= 1");
  }
  if (f_n < 2) {
    throw std::invalid_argument("need f_n >= 2 so that log f_n > 0");
  }
  if (!(c_b > 0.0) || !(c_d > 0.0) || !(c_s > 0.0)) {
    throw std::invalid_argument("constants must be positive");
  }
  PolicyParams p;
  p.n = n;
  p.f_n = f_n;
  p.rho = 1.0 - 1.0 / static_cast<double>(f_n);
  p.c_b = c_b;
  p.c_d = c_d;
  p.c_s = c_s;

  const double fd = static_cast<double>(f_n);
  const double lf = std::log(fd);
  p.b = static_cast<std::int64_t>(std::ceil(c_b * fd * fd * lf));
  p.d = static_cast<std::int64_t>(
      std::ceil(c_d * std::sqrt(static_cast<double>(n)) * fd * lf));
  p.s = static_cast<std::int64_t>(std::floor(
      p.rho * static_cast<double>(p.b) +
      std::sqrt(c_s * static_cast<double>(p.b) * lf)));
  p.ell = p.d + p.s - p.b;
  p.r = p.b - p.s;
  p.constraints_ok =
      c_b > c_s && c_d * c_d >= 640.0 * c_b && c_d > c_b && c_s >= 30.0;

  if (p.b <= p.d) {
    throw ParamInfeasible(
        "infeasible: round-robin phase length b - d is not positive (b = " +
        std::to_string(p.b) + ", d = " + std::to_string(p.d) + ")");
  }
  if (p.r < 1) {
    throw ParamInfeasible(
        "infeasible: backlog-clearing phase length r = b - s = " +
        std::to_string(p.r) + " < 1 (requires c_b > sqrt(c_s c_b))");
  }
  if (p.ell < 1) {
    throw ParamInfeasible(
        "infeasible: normal-clearing phase length ell = d + s - b = " +
        std::to_string(p.ell) + " < 1");
  }
  return p;
}

Schedule round_robin_schedule(std::int64_t m, Index n) {
  if (m < 1 || m > n) {
    throw std::invalid_argument("round-robin index out of range");
  }
  Schedule s(n);
  for (Index i = 0; i < n; ++i) {
    s.set(i, (i + m - 1) % n);
  }
  return s;
}

PhaseTag phase_of(std::int64_t tau, const PolicyParams& p) {
  if (tau < 1) throw std::invalid_argument("slot index must be >= 1");
  PhaseTag tag;
  if (tau <= p.d) {
    tag.period = 0;
    tag.phase = Phase::PreService;
    tag.slot_in_phase = tau;
    return tag;
  }
  // Service period k covers slots kb+d+1 .. (k+1)b+d.
  const std::int64_t k = (tau - p.d - 1) / p.b;
  const std::int64_t pos = tau - (k * p.b + p.d);  // 1..b
  tag.period = k;
  if (pos <= p.b - p.d) {
    tag.phase = Phase::RoundRobin;
    tag.slot_in_phase = pos;
  } else if (pos <= p.b - p.d + p.ell) {
    tag.phase = Phase::NormalClearing;
    tag.slot_in_phase = pos - (p.b - p.d);
  } else {
    tag.phase = Phase::BacklogClearing;
    tag.slot_in_phase = pos - (p.b - p.d) - p.ell;
  }
  return tag;
}

Schedule backlog_schedule(const CountMatrix& q) {
  const Index n = q.rows();
  Schedule s(n);
  std::vector<char> col_used(n, 0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (q(i, j) > 0 && !col_used[j]) {
        s.set(i, j);
        col_used[j] = 1;
        break;
      }
    }
  }
  return s;
}

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// O(n^3) assignment via potentials; minimizes total cost of a perfect
// assignment and reports the matched row for each column.
std::int64_t hungarian_min(const CountMatrix& cost, std::vector<int>& row_of_col) {
  const int n = static_cast<int>(cost.rows());
  std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0), minv(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      std::int64_t delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  row_of_col.assign(n, -1);
  std::int64_t total = 0;
  for (int j = 1; j <= n; ++j) {
    row_of_col[j - 1] = p[j] - 1;
    total += cost(p[j] - 1, j - 1);
  }
  return total;
}

// Maximum achievable matching weight with the given cells forced in or
// forbidden. Forbidden (and nonpositive) cells may still appear in the
// perfect assignment but contribute zero weight.
std::int64_t constrained_value(const CountMatrix& q,
                               const std::vector<std::pair<Index, Index>>& forced,
                               const Eigen::Matrix<bool, Eigen::Dynamic,
                                                   Eigen::Dynamic>& forbidden) {
  const Index n = q.rows();
  const std::int64_t big = q.maxCoeff() * n + 1;
  CountMatrix w = CountMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (q(i, j) > 0 && !forbidden(i, j)) w(i, j) = q(i, j);
    }
  }
  for (const auto& [i, j] : forced) w(i, j) = q(i, j) + big;
  std::vector<int> row_of_col;
  const std::int64_t min_cost = hungarian_min(-w, row_of_col);
  return -min_cost - big * static_cast<std::int64_t>(forced.size());
}

}  // namespace

std::int64_t maxweight_value(const CountMatrix& q) {
  if (!is_valid_queue_matrix(q)) {
    throw std::invalid_argument("invalid queue matrix");
  }
  const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> none =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
          q.rows(), q.cols(), false);
  return constrained_value(q, {}, none);
}

Schedule maxweight_schedule(const CountMatrix& q) {
  if (!is_valid_queue_matrix(q)) {
    throw std::invalid_argument("invalid queue matrix");
  }
  const Index n = q.rows();
  const std::int64_t best = maxweight_value(q);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> forbidden =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n,
                                                                    false);
  std::vector<std::pair<Index, Index>> forced;
  std::vector<char> row_used(n, 0), col_used(n, 0);
  // Row-major greedy: a cell joins the matching only if excluding it would
  // lower the achievable weight, which yields the lexicographically
  // smallest argmax.
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (q(i, j) <= 0 || row_used[i] || col_used[j]) continue;
      forbidden(i, j) = true;
      if (constrained_value(q, forced, forbidden) != best) {
        forbidden(i, j) = false;
        forced.emplace_back(i, j);
        row_used[i] = 1;
        col_used[j] = 1;
      }
    }
  }
  Schedule s(n);
  for (const auto& [i, j] : forced) s.set(i, j);
  return s;
}

BatchLedger BatchLedger::empty(Index n) {
  BatchLedger l;
  l.backlog = CountMatrix::Zero(n, n);
  l.batch_cur = CountMatrix::Zero(n, n);
  l.batch_next = CountMatrix::Zero(n, n);
  return l;
}

ThreePhasePolicy::ThreePhasePolicy(const PolicyParams& p)
    : params_(p), ledger_(BatchLedger::empty(p.n)) {}

Schedule ThreePhasePolicy::next_plan_schedule() {
  if (plan_block_ >= plan_.blocks.size()) {
    return Schedule(params_.n);
  }
  const Schedule s = plan_.blocks[plan_block_].schedule;
  if (++plan_block_pos_ == plan_.blocks[plan_block_].count) {
    ++plan_block_;
    plan_block_pos_ = 0;
  }
  return s;
}

Decision ThreePhasePolicy::decide(std::int64_t tau) {
  const PhaseTag tag = phase_of(tau, params_);
  switch (tag.phase) {
    case Phase::PreService:
      return {Schedule(params_.n), &ledger_.batch_cur};

    case Phase::RoundRobin: {
      if (tag.slot_in_phase == 1) {
        if (tag.period > 0) {
          assert(ledger_.batch_cur.sum() == 0);
          ledger_.batch_cur.swap(ledger_.batch_next);
          ledger_.batch_next.setZero();
          ledger_.k = tag.period;
        }
        stats_.push_back({tag.period, ledger_.backlog.sum(), 0});
      }
      const std::int64_t m = 1 + (tag.slot_in_phase - 1) % params_.n;
      return {round_robin_schedule(m, params_.n), &ledger_.batch_cur};
    }

    case Phase::NormalClearing: {
      if (tag.slot_in_phase == 1) {
        // All batch-k arrivals are in by now; plan against the snapshot.
        TruncatedClear tc = truncated_clear(ledger_.batch_cur, params_.ell);
        plan_ = std::move(tc.plan);
        plan_block_ = 0;
        plan_block_pos_ = 0;
      }
      return {next_plan_schedule(), &ledger_.batch_cur};
    }

    case Phase::BacklogClearing: {
      if (tag.slot_in_phase == 1) {
        const std::int64_t residual = ledger_.batch_cur.sum();
        assert(!stats_.empty() && stats_.back().k == tag.period);
        stats_.back().newly_backlogged = residual;
        ledger_.backlog += ledger_.batch_cur;
        ledger_.batch_cur.setZero();
      }
      return {backlog_schedule(ledger_.backlog), &ledger_.backlog};
    }
  }
  throw std::logic_error("unreachable phase");
}

void ThreePhasePolicy::route_arrivals(std::int64_t tau,
                                      const CountMatrix& arrivals) {
  const std::int64_t batch = (tau - 1) / params_.b;
  if (batch == ledger_.k) {
    ledger_.batch_cur += arrivals;
  } else {
    assert(batch == ledger_.k + 1);
    ledger_.batch_next += arrivals;
  }
}

StandardBatchingPolicy::StandardBatchingPolicy(const PolicyParams& p)
    : params_(p), ledger_(BatchLedger::empty(p.n)) {}

Schedule StandardBatchingPolicy::next_plan_schedule() {
  if (plan_block_ >= plan_.blocks.size()) {
    return Schedule(params_.n);
  }
  const Schedule s = plan_.blocks[plan_block_].schedule;
  if (++plan_block_pos_ == plan_.blocks[plan_block_].count) {
    ++plan_block_;
    plan_block_pos_ = 0;
  }
  return s;
}

Decision StandardBatchingPolicy::decide(std::int64_t tau) {
  const std::int64_t window = (tau - 1) / params_.b;
  if (window == 0) {
    // First batch still arriving; nothing to serve yet.
    return {Schedule(params_.n), &ledger_.batch_cur};
  }
  if (tau == window * params_.b + 1) {
    // Drain window boundary: retire the previous batch, promote the one
    // that just finished arriving.
    if (!stats_.empty()) {
      const std::int64_t residual = ledger_.batch_cur.sum();
      stats_.back().newly_backlogged = residual;
      ledger_.backlog += ledger_.batch_cur;
      ledger_.batch_cur.setZero();
    }
    ledger_.batch_cur.swap(ledger_.batch_next);
    ledger_.batch_next.setZero();
    ledger_.k = window - 1;
    stats_.push_back({ledger_.k, ledger_.backlog.sum(), 0});
    TruncatedClear tc = truncated_clear(ledger_.batch_cur, params_.b);
    plan_ = std::move(tc.plan);
    plan_block_ = 0;
    plan_block_pos_ = 0;
  }
  if (plan_block_ < plan_.blocks.size()) {
    return {next_plan_schedule(), &ledger_.batch_cur};
  }
  return {backlog_schedule(ledger_.backlog), &ledger_.backlog};
}

void StandardBatchingPolicy::route_arrivals(std::int64_t /*tau*/,
                                            const CountMatrix& arrivals) {
  ledger_.batch_next += arrivals;
}

}  // namespace switchsim
