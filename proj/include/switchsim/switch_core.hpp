#pragma once

#include <cstdint>
#include <random>

#include "switchsim/types.hpp"

namespace switchsim {

/// splitmix64 step; used to derive per-replication RNG stream seeds from a
/// root seed so that results do not depend on execution order.
std::uint64_t splitmix64(std::uint64_t& state);

/// Stream seed for a replication identified by (root_seed, n, f_n).
std::uint64_t derive_stream_seed(std::uint64_t root_seed, std::int64_t n,
                                 std::int64_t f_n);

using Rng = std::mt19937_64;

struct ArrivalConfig {
  Index n = 0;
  double rho = 0.0;             // load factor in (0, 1]
  double per_queue_rate = 0.0;  // rho / n
  std::uint64_t seed = 0;

  static ArrivalConfig make(Index n, double rho, std::uint64_t seed);
};

/// One-slot Bernoulli arrival matrix. Entries are drawn in row-major order
/// (i outer, j inner), one 64-bit draw per queue, so trajectories are
/// reproducible for a fixed stream.
CountMatrix gen_arrivals(const ArrivalConfig& cfg, Rng& rng);

struct SwitchState {
  std::int64_t tau = 1;  // current slot, 1-based
  CountMatrix queues;
  CountMatrix cum_arrivals;
  CountMatrix cum_service;
  std::int64_t wasted_service = 0;  // offered slots with no eligible packet

  static SwitchState empty(Index n);

  /// Conservation identity: queues == cum_arrivals - cum_service, with
  /// cum_service <= cum_arrivals entrywise.
  bool conservation_holds() const;
};

/// Applies schedule s mid-slot. `eligible` restricts service to one packet
/// class: a served packet is removed from both `eligible` and the total
/// queues. Pass nullptr to make every queued packet eligible. An offered
/// (i,j) with no eligible packet counts as wasted service. Returns the
/// number of packets served.
std::int64_t apply_schedule(SwitchState& state, const Schedule& s,
                            CountMatrix* eligible);

/// Full slot: serve mid-slot, append fresh arrivals at slot end (also into
/// `arrival_class` when given), advance tau.
void advance_slot(SwitchState& state, const Schedule& s, CountMatrix* eligible,
                  CountMatrix* arrival_class, const ArrivalConfig& cfg,
                  Rng& rng);

}  // namespace switchsim
