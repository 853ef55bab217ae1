#include "switchsim/switch_core.hpp"

#include <stdexcept>

namespace switchsim {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t root_seed, std::int64_t n,
                                 std::int64_t f_n) {
  std::uint64_t s = root_seed;
  std::uint64_t h = splitmix64(s);
  s ^= static_cast<std::uint64_t>(n) * 0xd1342543de82ef95ULL;
  h ^= splitmix64(s);
  s ^= static_cast<std::uint64_t>(f_n) * 0xaf251af3b0f025b5ULL;
  h ^= splitmix64(s);
  return h;
}

ArrivalConfig ArrivalConfig::make(Index n, double rho, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("port count must be >= 1");
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("load factor must lie in [0, 1]");
  }
  ArrivalConfig cfg;
  cfg.n = n;
  cfg.rho = rho;
  cfg.per_queue_rate = rho / static_cast<double>(n);
  cfg.seed = seed;
  return cfg;
}

namespace {

// 64-bit threshold comparison: one raw draw per queue, bias < 2^-64.
struct BernoulliDraw {
  std::uint64_t threshold;
  bool always, never;

  explicit BernoulliDraw(double p)
      : threshold(0), always(p >= 1.0), never(p <= 0.0) {
    if (!always && !never) {
      threshold = static_cast<std::uint64_t>(
          p * 18446744073709551616.0 /* 2^64 */);
    }
  }

  bool operator()(Rng& rng) const {
    const std::uint64_t u = rng();  // always consume one draw per queue
    if (always) return true;
    if (never) return false;
    return u < threshold;
  }
};

}  // namespace

CountMatrix gen_arrivals(const ArrivalConfig& cfg, Rng& rng) {
  const BernoulliDraw draw(cfg.per_queue_rate);
  CountMatrix a(cfg.n, cfg.n);
  for (Index i = 0; i < cfg.n; ++i) {
    for (Index j = 0; j < cfg.n; ++j) {
      a(i, j) = draw(rng) ? 1 : 0;
    }
  }
  return a;
}

SwitchState SwitchState::empty(Index n) {
  SwitchState s;
  s.queues = CountMatrix::Zero(n, n);
  s.cum_arrivals = CountMatrix::Zero(n, n);
  s.cum_service = CountMatrix::Zero(n, n);
  return s;
}

bool SwitchState::conservation_holds() const {
  return queues == cum_arrivals - cum_service &&
         (cum_service.array() <= cum_arrivals.array()).all() &&
         (queues.array() >= 0).all();
}

std::int64_t apply_schedule(SwitchState& state, const Schedule& s,
                            CountMatrix* eligible) {
  const Index n = state.queues.rows();
  if (s.ports() != n) throw std::invalid_argument("schedule dimension mismatch");
  std::int64_t served = 0;
  for (Index i = 0; i < n; ++i) {
    const int j = s.matched(i);
    if (j < 0) continue;
    std::int64_t& avail = eligible ? (*eligible)(i, j) : state.queues(i, j);
    if (avail > 0) {
      if (eligible) --(*eligible)(i, j);
      --state.queues(i, j);
      ++state.cum_service(i, j);
      ++served;
    } else {
      ++state.wasted_service;
    }
  }
  return served;
}

void advance_slot(SwitchState& state, const Schedule& s, CountMatrix* eligible,
                  CountMatrix* arrival_class, const ArrivalConfig& cfg,
                  Rng& rng) {
  apply_schedule(state, s, eligible);
  const CountMatrix a = gen_arrivals(cfg, rng);
  state.cum_arrivals += a;
  state.queues += a;
  if (arrival_class) *arrival_class += a;
  ++state.tau;
}

}  // namespace switchsim
