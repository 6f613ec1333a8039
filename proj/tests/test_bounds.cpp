#include "doctest.h"
#include "sicqta/bounds.hpp"
#include "sicqta/oracle.hpp"

using namespace sicqta;

TEST_CASE("loose upper bound evaluates the base-2 log formula") {
  CHECK(qta_upper_loose(4, 3) == 12);
  CHECK(qta_upper_loose(1, 3) == 5);
  CHECK(qta_upper_loose(2, 6) == 14);
  CHECK_THROWS_AS(qta_upper_loose(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(qta_upper_loose(9, 3), std::invalid_argument);
  // The guarded floor stays well-defined across the supported range.
  for (int u = 1; u <= 12; ++u)
    for (std::int64_t m = 1; m <= (1 << u); ++m) CHECK(qta_upper_loose(m, u) >= 1);
}

TEST_CASE("tight upper bound matches hand-evaluated points") {
  CHECK(qta_upper(4, 3) == 11);
  CHECK(qta_upper(2, 3) == 7);
  CHECK(qta_upper(3, 3) == 7);
  CHECK_THROWS_AS(qta_upper(1, 3), std::invalid_argument);
}

TEST_CASE("lower bound is 2M-1") {
  CHECK(qta_lower(1) == 1);
  CHECK(qta_lower(4) == 7);
  CHECK(qta_lower(3) == 5);
  CHECK_THROWS_AS(qta_lower(0), std::invalid_argument);
}

TEST_CASE("skipped slots split into idle and cancellation parts") {
  SkippedSlots s = skipped_slots(4, 3);
  CHECK(s.idle == 2);
  CHECK(s.cancel == 3);
  CHECK(s.total() == 5);

  s = skipped_slots(3, 3);
  CHECK(s.idle == 2);
  CHECK(s.cancel == 1);
  CHECK(s.total() == 3);

  for (int u = 1; u <= 12; ++u) {
    const std::int64_t n = std::int64_t{1} << u;
    CHECK(skipped_slots(n, u).total() == n - 1);
  }
  CHECK_THROWS_AS(skipped_slots(1, 3), std::invalid_argument);
}

TEST_CASE("sic upper bound matches hand-evaluated points") {
  CHECK(sicqta_upper(4, 3) == 6);
  CHECK(sicqta_upper(3, 6) == 7);
  for (int u = 1; u <= 6; ++u)
    CHECK(sicqta_upper(std::int64_t{1} << u, u) == std::int64_t{1} << u);
  CHECK_THROWS_AS(sicqta_upper(1, 3), std::invalid_argument);
}

TEST_CASE("sic lower bound is max(M, 1)") {
  CHECK(sicqta_lower(4) == 4);
  CHECK(sicqta_lower(0) == 1);
  CHECK(sicqta_lower(64) == 64);
}

TEST_CASE("sic upper equals qta upper minus the skipped slots") {
  for (int u = 1; u <= 12; ++u)
    for (std::int64_t m = 2; m <= (std::int64_t{1} << u); ++m)
      CHECK(sicqta_upper(m, u) == qta_upper(m, u) - skipped_slots(m, u).total());
}

TEST_CASE("sic upper bound is nondecreasing in u for fixed M") {
  for (std::int64_t m = 2; m <= 64; ++m) {
    int first_u = 1;
    while ((std::int64_t{1} << first_u) < m) ++first_u;
    for (int u = first_u; u < 12; ++u)
      CHECK(sicqta_upper(m, u) <= sicqta_upper(m, u + 1));
  }
}

TEST_CASE("latency bounds short-circuit M in {0,1} to a single slot") {
  for (Algorithm alg : {Algorithm::Qta, Algorithm::Sicqta}) {
    CHECK(latency_bounds(alg, 0, 6).lower == 1);
    CHECK(latency_bounds(alg, 0, 6).upper == 1);
    CHECK(latency_bounds(alg, 1, 6).lower == 1);
    CHECK(latency_bounds(alg, 1, 6).upper == 1);
  }
  CHECK(latency_bounds(Algorithm::Sicqta, 4, 3).upper == 6);
  CHECK(latency_bounds(Algorithm::Qta, 4, 3).upper == 11);
}

TEST_CASE("worst-case oracle recovers the reference extremes") {
  TreeParams p(3);
  OracleResult qta = worst_case_oracle(Algorithm::Qta, 4, p);
  CHECK(qta.latency == 11);
  CHECK(qta.exact);
  CHECK(qta.witness == IdSet{0, 1, 4, 5});

  OracleResult sic = worst_case_oracle(Algorithm::Sicqta, 4, p);
  CHECK(sic.latency == 6);
  CHECK(sic.witness == IdSet{0, 1, 4, 5});

  CHECK(worst_case_oracle(Algorithm::Sicqta, 3, p).latency == 4);
}

TEST_CASE("best-case oracle recovers the reference extremes") {
  TreeParams p(3);
  CHECK(best_case_oracle(Algorithm::Qta, 4, p).latency == 7);
  CHECK(best_case_oracle(Algorithm::Sicqta, 4, p).latency == 4);
  CHECK(best_case_oracle(Algorithm::Qta, 1, p).latency == 1);
}

TEST_CASE("tight upper bound confirmed by enumeration over all pairs at u=3") {
  TreeParams p(3);
  OracleResult worst = worst_case_oracle(Algorithm::Qta, 2, p);
  CHECK(worst.evaluated == 28);  // C(8,2)
  CHECK(worst.latency == qta_upper(2, 3));
}

TEST_CASE("enumeration worst and best cases respect the closed forms") {
  for (int u = 1; u <= 4; ++u) {
    TreeParams p(u);
    for (int m = 1; m <= (1 << u); ++m) {
      const LatencyBounds q = latency_bounds(Algorithm::Qta, m, u);
      const LatencyBounds s = latency_bounds(Algorithm::Sicqta, m, u);
      CHECK(worst_case_oracle(Algorithm::Qta, m, p).latency <= q.upper);
      CHECK(best_case_oracle(Algorithm::Qta, m, p).latency >= q.lower);
      CHECK(worst_case_oracle(Algorithm::Sicqta, m, p).latency <= s.upper);
      CHECK(best_case_oracle(Algorithm::Sicqta, m, p).latency >= s.lower);
    }
  }
}

TEST_CASE("sic bound is tight at powers of two") {
  for (int u = 1; u <= 4; ++u) {
    TreeParams p(u);
    for (int j = 1; (1 << j) <= (1 << u); ++j) {
      const int m = 1 << j;
      CHECK(worst_case_oracle(Algorithm::Sicqta, m, p).latency ==
            sicqta_upper(m, u));
    }
  }
}

TEST_CASE("oracle witness difference reproduces the skipped-slot total") {
  TreeParams p(3);
  CHECK(worst_case_oracle(Algorithm::Qta, 4, p).latency -
            worst_case_oracle(Algorithm::Sicqta, 4, p).latency ==
        skipped_slots(4, 3).total());
  CHECK(worst_case_oracle(Algorithm::Qta, 3, p).latency -
            worst_case_oracle(Algorithm::Sicqta, 3, p).latency ==
        skipped_slots(3, 3).total());
}

TEST_CASE("enumeration over budget instructs the caller to sample") {
  TreeParams p(12);
  CHECK_THROWS_WITH_AS(worst_case_oracle(Algorithm::Qta, 9, p),
                       doctest::Contains("use sampled mode"),
                       std::invalid_argument);
  OracleResult sampled =
      worst_case_oracle(Algorithm::Qta, 9, p, OracleBudget::sampled(200, 7));
  CHECK_FALSE(sampled.exact);
  CHECK(sampled.evaluated == 200);
  CHECK(sampled.latency <= qta_upper(9, 12));
}

TEST_CASE("oracle results are identical across worker counts") {
  TreeParams p(4);
  OracleResult one = worst_case_oracle(Algorithm::Sicqta, 5, p,
                                       OracleBudget::enumerate(), 1);
  OracleResult eight = worst_case_oracle(Algorithm::Sicqta, 5, p,
                                         OracleBudget::enumerate(), 8);
  CHECK(one.latency == eight.latency);
  CHECK(one.witness == eight.witness);

  OracleResult s1 = best_case_oracle(Algorithm::Qta, 6, p,
                                     OracleBudget::sampled(500, 42), 1);
  OracleResult s8 = best_case_oracle(Algorithm::Qta, 6, p,
                                     OracleBudget::sampled(500, 42), 8);
  CHECK(s1.latency == s8.latency);
  CHECK(s1.witness == s8.witness);
}
