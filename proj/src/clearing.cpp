#include "switchsim/clearing.hpp"

#include <algorithm>
#include <stdexcept>

namespace switchsim {

namespace {

void require_valid(const CountMatrix& q) {
  if (!is_valid_queue_matrix(q)) {
    throw std::invalid_argument("invalid queue matrix");
  }
}

// Kuhn's augmenting-path search on the positive support of m.
bool try_augment(const CountMatrix& m, Index i, std::vector<char>& visited,
                 std::vector<int>& match_col) {
  const Index n = m.rows();
  for (Index j = 0; j < n; ++j) {
    if (m(i, j) <= 0 || visited[j]) continue;
    visited[j] = 1;
    if (match_col[j] < 0 ||
        try_augment(m, match_col[j], visited, match_col)) {
      match_col[j] = static_cast<int>(i);
      return true;
    }
  }
  return false;
}

}  // namespace

std::int64_t min_clearance_time(const CountMatrix& q) {
  require_valid(q);
  const std::int64_t max_row = q.rowwise().sum().maxCoeff();
  const std::int64_t max_col = q.colwise().sum().maxCoeff();
  return std::max(max_row, max_col);
}

CountMatrix pad_to_regular(const CountMatrix& q, std::int64_t L) {
  if (L < min_clearance_time(q)) {
    throw std::invalid_argument("padding target below minimum clearance time");
  }
  const Index n = q.rows();
  CountMatrix m = q;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> row_def =
      (L - m.rowwise().sum().array()).matrix();
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> col_def =
      (L - m.colwise().sum().transpose().array()).matrix();
  // Total row deficiency equals total column deficiency (both are
  // n*L - sum(q)), so the two cursors exhaust together.
  Index i = 0, j = 0;
  while (i < n && j < n) {
    if (row_def(i) == 0) { ++i; continue; }
    if (col_def(j) == 0) { ++j; continue; }
    const std::int64_t add = std::min(row_def(i), col_def(j));
    m(i, j) += add;
    row_def(i) -= add;
    col_def(j) -= add;
  }
  return m;
}

Schedule extract_perfect_matching(const CountMatrix& m) {
  const Index n = m.rows();
  std::vector<int> match_col(n, -1);
  for (Index i = 0; i < n; ++i) {
    std::vector<char> visited(n, 0);
    if (!try_augment(m, i, visited, match_col)) {
      throw std::logic_error(
          "no perfect matching on support of a sum-regular matrix");
    }
  }
  Schedule s(n);
  for (Index j = 0; j < n; ++j) s.set(match_col[j], j);
  return s;
}

const Schedule& ClearancePlan::at(std::int64_t t) const {
  std::int64_t offset = 0;
  for (const Block& b : blocks) {
    if (t < offset + b.count) return b.schedule;
    offset += b.count;
  }
  throw std::out_of_range("plan slot index out of range");
}

std::vector<Schedule> ClearancePlan::flat() const {
  std::vector<Schedule> out;
  out.reserve(static_cast<std::size_t>(length));
  for (const Block& b : blocks) {
    for (std::int64_t c = 0; c < b.count; ++c) out.push_back(b.schedule);
  }
  return out;
}

ClearancePlan clearing_plan(const CountMatrix& q) {
  ClearancePlan plan;
  plan.length = min_clearance_time(q);
  if (plan.length == 0) return plan;

  CountMatrix m = pad_to_regular(q, plan.length);
  std::int64_t remaining = plan.length;
  while (remaining > 0) {
    Schedule s = extract_perfect_matching(m);
    std::int64_t c = remaining;
    for (Index i = 0; i < m.rows(); ++i) c = std::min(c, m(i, s.matched(i)));
    for (Index i = 0; i < m.rows(); ++i) m(i, s.matched(i)) -= c;
    plan.blocks.push_back({std::move(s), c});
    remaining -= c;
  }
  return plan;
}

CountMatrix replay_plan(const CountMatrix& q, const ClearancePlan& plan,
                        std::int64_t slots) {
  CountMatrix rest = q;
  std::int64_t left = slots;
  for (const ClearancePlan::Block& b : plan.blocks) {
    if (left <= 0) break;
    const std::int64_t reps = std::min(left, b.count);
    for (Index i = 0; i < rest.rows(); ++i) {
      const int j = b.schedule.matched(i);
      if (j >= 0) rest(i, j) -= std::min(rest(i, j), reps);
    }
    left -= reps;
  }
  return rest;
}

TruncatedClear truncated_clear(const CountMatrix& q, std::int64_t budget) {
  if (budget < 0) throw std::invalid_argument("negative clearing budget");
  ClearancePlan full = clearing_plan(q);
  TruncatedClear out;
  out.plan.length = std::min(full.length, budget);
  std::int64_t left = out.plan.length;
  for (ClearancePlan::Block& b : full.blocks) {
    if (left <= 0) break;
    const std::int64_t reps = std::min(left, b.count);
    out.plan.blocks.push_back({std::move(b.schedule), reps});
    left -= reps;
  }
  out.residual = replay_plan(q, out.plan, out.plan.length).sum();
  return out;
}

}  // namespace switchsim
