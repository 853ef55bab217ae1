#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "switchsim/bounds.hpp"

using namespace switchsim;

TEST_CASE("chernoff tail bound evaluations") {
  // x^2 / (2 mean) = 100 / 100 = 1.
  CHECK(chernoff_lower(50.0, 10.0) == doctest::Approx(std::exp(-1.0)));
  // 100 / (2 (50 + 10/3)) = 0.9375.
  CHECK(chernoff_upper(50.0, 10.0) == doctest::Approx(std::exp(-0.9375)));
  CHECK(chernoff_lower(1.0, 100.0) < 1e-300);
  CHECK_THROWS_AS(chernoff_lower(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(chernoff_upper(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("chernoff bounds dominate empirical binomial tails") {
  std::mt19937_64 rng(2027);
  for (const int m : {200, 2000}) {
    for (const double p : {0.1, 0.4}) {
      const double mean = m * p;
      const double sigma = std::sqrt(m * p * (1.0 - p));
      std::binomial_distribution<int> bin(m, p);
      const int samples = 20000;
      for (const double mult : {1.0, 2.0}) {
        const double x = mult * sigma;
        int below = 0, above = 0;
        std::mt19937_64 local = rng;
        for (int t = 0; t < samples; ++t) {
          const int v = bin(local);
          if (v <= mean - x) ++below;
          if (v >= mean + x) ++above;
        }
        const double se = 3.0 / std::sqrt(static_cast<double>(samples));
        CHECK(static_cast<double>(below) / samples <=
              chernoff_lower(mean, x) + se);
        CHECK(static_cast<double>(above) / samples <=
              chernoff_upper(mean, x) + se);
      }
    }
  }
}

TEST_CASE("kingman_bound evaluations") {
  // Bernoulli(0)/deterministic(1): numerator m2y = 1, gap 1 -> 0.5.
  CHECK(kingman_bound({0.0, 0.0, 1.0, 1.0}) == doctest::Approx(0.5));
  // Bernoulli(lambda) arrivals, deterministic unit service:
  // (lambda + 1 - 2 lambda) / (2 (1 - lambda)) = 0.5 for all lambda < 1.
  for (const double lambda : {0.1, 0.5, 0.9}) {
    CHECK(kingman_bound({lambda, lambda, 1.0, 1.0}) == doctest::Approx(0.5));
  }
  CHECK_THROWS_AS(kingman_bound({1.0, 1.0, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("lindley_step recursion") {
  CHECK(lindley_step(0.0, 0.0, 1.0) == 0.0);
  CHECK(lindley_step(3.0, 2.0, 1.0) == 4.0);
  CHECK(lindley_step(std::int64_t{5}, std::int64_t{0}, std::int64_t{9}) == 0);
  CHECK(lindley_step(std::int64_t{5}, std::int64_t{3}, std::int64_t{1}) == 7);
}

TEST_CASE("kingman dominates a simulated stable single queue") {
  // Bernoulli(0.8) arrivals, deterministic unit service.
  std::mt19937_64 rng(404);
  const double lambda = 0.8;
  std::bernoulli_distribution arr(lambda);
  std::int64_t z = 0, sum = 0;
  const int slots = 2000000;
  for (int t = 0; t < slots; ++t) {
    sum += z;
    z = lindley_step(z, arr(rng) ? std::int64_t{1} : std::int64_t{0},
                     std::int64_t{1});
  }
  const double avg = static_cast<double>(sum) / slots;
  CHECK(avg <= kingman_bound({lambda, lambda, 1.0, 1.0}));
}

TEST_CASE("total_queue_bound evaluations") {
  CHECK(total_queue_bound(25, 56733) == 4254975);
  CHECK(total_queue_bound(1, 1) == 3);
  CHECK_THROWS_AS(total_queue_bound(0, 5), std::invalid_argument);
}

TEST_CASE("theorem1_envelope scaling") {
  CHECK(theorem1_envelope(1, 1, 1.0) == 0.0);
  // Doubling n with f_n = n multiplies the envelope by
  // 2^2.5 * ln(2n)/ln(n).
  const double e8 = theorem1_envelope(8, 8, 1.0);
  const double e16 = theorem1_envelope(16, 16, 1.0);
  const double expect = std::pow(2.0, 2.5) * std::log(16.0) / std::log(8.0);
  CHECK(e16 / e8 == doctest::Approx(expect));
  CHECK(theorem1_envelope(4, 4, 2.0) ==
        doctest::Approx(2.0 * 8.0 * 4.0 * std::log(4.0)));
  CHECK_THROWS_AS(theorem1_envelope(4, 3, 1.0), std::invalid_argument);
}
