#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "switchsim/switch_core.hpp"
#include "switchsim/types.hpp"

using namespace switchsim;

namespace {

CountMatrix mat2(std::int64_t a, std::int64_t b, std::int64_t c,
                 std::int64_t d) {
  CountMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Schedule random_schedule(Index n, Rng& rng) {
  // Random subpermutation: shuffle outputs, keep each match with prob 1/2.
  std::vector<Index> perm(n);
  for (Index i = 0; i < n; ++i) perm[i] = i;
  for (Index i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng() % (i + 1)]);
  }
  Schedule s(n);
  for (Index i = 0; i < n; ++i) {
    if (rng() & 1) s.set(i, perm[i]);
  }
  return s;
}

}  // namespace

TEST_CASE("is_valid_schedule basics") {
  CountMatrix id = CountMatrix::Identity(3, 3);
  CHECK(is_valid_schedule(id));
  CHECK(is_valid_schedule(CountMatrix::Zero(4, 4)));
  CHECK_FALSE(is_valid_schedule(CountMatrix::Ones(2, 2)));
  CountMatrix two = CountMatrix::Zero(2, 2);
  two(0, 0) = 2;
  CHECK_FALSE(is_valid_schedule(two));
}

TEST_CASE("queue matrix text serialization round-trips") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 1 + rng() % 6;
    CountMatrix q(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) q(i, j) = rng() % 50;
    }
    CHECK(parse_queue_matrix(format_queue_matrix(q)) == q);
  }
  CHECK_THROWS_AS(parse_queue_matrix("1,2\n3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_queue_matrix("1,-2\n3,4"), std::invalid_argument);
}

TEST_CASE("gen_arrivals degenerate rates") {
  Rng rng(1);
  ArrivalConfig zero = ArrivalConfig::make(3, 0.0, 1);
  CHECK(gen_arrivals(zero, rng).sum() == 0);

  ArrivalConfig one = ArrivalConfig::make(3, 1.0, 1);
  one.per_queue_rate = 1.0;
  CHECK(gen_arrivals(one, rng).sum() == 9);
}

TEST_CASE("gen_arrivals empirical mean within 4 sigma") {
  // n = 4, rho = 0.75 -> p = 0.1875 per queue per slot.
  const ArrivalConfig cfg = ArrivalConfig::make(4, 0.75, 99);
  Rng rng(derive_stream_seed(99, 4, 4));
  const int slots = 100000;
  CountMatrix totals = CountMatrix::Zero(4, 4);
  for (int t = 0; t < slots; ++t) totals += gen_arrivals(cfg, rng);
  const double p = 0.1875;
  const double half_width = 4.0 * std::sqrt(p * (1.0 - p) / slots);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 4; ++j) {
      const double mean = static_cast<double>(totals(i, j)) / slots;
      CHECK(mean >= p - half_width);
      CHECK(mean <= p + half_width);
    }
  }
}

TEST_CASE("gen_arrivals is deterministic per stream") {
  const ArrivalConfig cfg = ArrivalConfig::make(5, 0.5, 42);
  Rng a(derive_stream_seed(42, 5, 5));
  Rng b(derive_stream_seed(42, 5, 5));
  for (int t = 0; t < 100; ++t) {
    CHECK(gen_arrivals(cfg, a) == gen_arrivals(cfg, b));
  }
}

TEST_CASE("apply_schedule serves and counts waste") {
  SwitchState st = SwitchState::empty(2);

  SUBCASE("empty queues waste every offered slot") {
    Schedule id(2);
    id.set(0, 0);
    id.set(1, 1);
    CHECK(apply_schedule(st, id, nullptr) == 0);
    CHECK(st.wasted_service == 2);
    CHECK(st.queues.sum() == 0);
  }

  SUBCASE("single packet served") {
    SwitchState s1 = SwitchState::empty(1);
    s1.queues(0, 0) = 1;
    s1.cum_arrivals(0, 0) = 1;
    Schedule s(1);
    s.set(0, 0);
    CHECK(apply_schedule(s1, s, nullptr) == 1);
    CHECK(s1.queues(0, 0) == 0);
    CHECK(s1.conservation_holds());
  }

  SUBCASE("diagonal service on [[2,0],[0,3]]") {
    st.queues = mat2(2, 0, 0, 3);
    st.cum_arrivals = st.queues;
    Schedule id(2);
    id.set(0, 0);
    id.set(1, 1);
    CHECK(apply_schedule(st, id, nullptr) == 2);
    CHECK(st.queues == mat2(1, 0, 0, 2));
    CHECK(st.conservation_holds());
  }

  SUBCASE("eligibility restricts service below queue level") {
    st.queues = mat2(2, 0, 0, 3);
    st.cum_arrivals = st.queues;
    CountMatrix eligible = mat2(0, 0, 0, 1);
    Schedule id(2);
    id.set(0, 0);
    id.set(1, 1);
    CHECK(apply_schedule(st, id, &eligible) == 1);
    CHECK(st.queues == mat2(2, 0, 0, 2));
    CHECK(eligible == mat2(0, 0, 0, 0));
    CHECK(st.wasted_service == 1);  // (0,0) offered but not eligible
  }
}

TEST_CASE("advance_slot composition") {
  SUBCASE("zero arrivals and zero schedule only advance the clock") {
    SwitchState st = SwitchState::empty(3);
    ArrivalConfig cfg = ArrivalConfig::make(3, 0.0, 1);
    Rng rng(1);
    advance_slot(st, Schedule(3), nullptr, nullptr, cfg, rng);
    CHECK(st.tau == 2);
    CHECK(st.queues.sum() == 0);
  }

  SUBCASE("no service: queues equal cumulative arrivals") {
    SwitchState st = SwitchState::empty(3);
    const ArrivalConfig cfg = ArrivalConfig::make(3, 0.9, 5);
    Rng rng(derive_stream_seed(5, 3, 3));
    for (int t = 0; t < 500; ++t) {
      advance_slot(st, Schedule(3), nullptr, nullptr, cfg, rng);
    }
    CHECK(st.queues == st.cum_arrivals);
    CHECK(st.conservation_holds());
  }

  SUBCASE("conservation sweep under random schedules") {
    SwitchState st = SwitchState::empty(4);
    const ArrivalConfig cfg = ArrivalConfig::make(4, 0.8, 17);
    Rng rng(derive_stream_seed(17, 4, 4));
    Rng sched_rng(3);
    CountMatrix prev_arr = st.cum_arrivals, prev_srv = st.cum_service;
    for (int t = 0; t < 10000; ++t) {
      advance_slot(st, random_schedule(4, sched_rng), nullptr, nullptr, cfg,
                   rng);
      REQUIRE(st.conservation_holds());
      REQUIRE((st.cum_arrivals.array() >= prev_arr.array()).all());
      REQUIRE((st.cum_service.array() >= prev_srv.array()).all());
      prev_arr = st.cum_arrivals;
      prev_srv = st.cum_service;
    }
  }
}
