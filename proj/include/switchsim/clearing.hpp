#pragma once

#include <cstdint>
#include <vector>

#include "switchsim/types.hpp"

namespace switchsim {

/// Fewest slots needed to drain q with matchings: the largest row or column
/// sum of q.
std::int64_t min_clearance_time(const CountMatrix& q);

/// Smallest M >= q (entrywise) with every row and column sum equal to L.
/// Requires L >= min_clearance_time(q).
CountMatrix pad_to_regular(const CountMatrix& q, std::int64_t L);

/// Perfect matching supported on the positive entries of m. Requires all row
/// and column sums of m equal to some L >= 1; regularity guarantees
/// existence, so failure to find one throws std::logic_error.
Schedule extract_perfect_matching(const CountMatrix& m);

/// A drain plan of total length L, run-length encoded: each block is one
/// permutation schedule repeated `count` times.
struct ClearancePlan {
  struct Block {
    Schedule schedule;
    std::int64_t count = 0;
  };

  std::int64_t length = 0;  // == min_clearance_time of the source matrix
  std::vector<Block> blocks;

  /// Schedule for the t-th slot of the plan, t in [0, length).
  const Schedule& at(std::int64_t t) const;

  /// Fully expanded schedule sequence; intended for small plans.
  std::vector<Schedule> flat() const;
};

/// Optimal clearing plan: replaying it against q (packets-only service)
/// empties q in exactly min_clearance_time(q) slots.
ClearancePlan clearing_plan(const CountMatrix& q);

struct TruncatedClear {
  ClearancePlan plan;           // trimmed to min(L, budget) slots
  std::int64_t residual = 0;    // packets of q left after the trimmed plan
};

/// First min(L, budget) slots of a clearing plan for q, plus the residual
/// packet count. residual == 0 whenever budget >= min_clearance_time(q).
TruncatedClear truncated_clear(const CountMatrix& q, std::int64_t budget);

/// Serves q with the first `slots` schedules of the plan (packets only);
/// returns the drained matrix. Test and verification helper.
CountMatrix replay_plan(const CountMatrix& q, const ClearancePlan& plan,
                        std::int64_t slots);

}  // namespace switchsim
