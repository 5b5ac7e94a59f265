#include <doctest.h>

#include <cmath>
#include <sstream>

#include "l0rec/bounds.hpp"
#include "l0rec/ideal.hpp"
#include "l0rec/rng.hpp"

using namespace l0rec;

TEST_CASE("K = 2, M = 3: every hit pattern recovers both coordinates") {
  for (bool fresh : {false, true}) {
    for (int pattern = 0; pattern < 8; ++pattern) {
      int calls = 0;
      const IdealOutcome out = simulate_ideal_with({2, 3, fresh, 0}, [&](std::int64_t j, std::int64_t n) {
        ++calls;
        return n == 1 ? std::int64_t{0} : static_cast<std::int64_t>((pattern >> j) & 1);
      });
      CAPTURE(pattern);
      CAPTURE(fresh);
      CHECK(out.recovered == 2);
      CHECK(out.iterations <= 2);
      CHECK(out.first_iteration_failures <= 1);
      CHECK(calls >= 3);
    }
  }
}

TEST_CASE("K = 1, M = 2 always recovers") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const IdealOutcome out = simulate_ideal({1, 2, false, seed});
    CHECK(out.recovered == 1);
    CHECK(out.iterations == 1);
  }
  CHECK(simulate_ideal({1, 1, false, 0}).recovered == 0);
}

TEST_CASE("pickers always see the current unrecovered count") {
  for (bool fresh : {false, true}) {
    std::vector<CounterStream> streams;
    for (int j = 0; j < 30; ++j) streams.emplace_back(4, Stream::kIdealized, j);
    std::vector<std::int64_t> seen_n;
    const IdealOutcome out = simulate_ideal_with({20, 30, fresh, 0}, [&](std::int64_t j, std::int64_t n) {
      seen_n.push_back(n);
      return static_cast<std::int64_t>(streams[static_cast<std::size_t>(j)].next_below(static_cast<std::uint64_t>(n)));
    });
    // Each iteration's picks are made against that iteration's unrecovered set.
    std::size_t pos = 0;
    for (const auto& it : out.trace) {
      CHECK(it.hits == 30);
      while (pos < seen_n.size() && seen_n[pos] == it.unrecovered_before) ++pos;
    }
    CHECK(pos == seen_n.size());
    if (fresh) CHECK(seen_n.size() == 30 * out.trace.size());
  }
}

TEST_CASE("first-iteration failures match p_ideal") {
  for (auto [k, m] : {std::pair<std::int64_t, std::int64_t>{10, 48}, {100, 480}}) {
    const auto rows = ideal_sweep({k}, {static_cast<double>(m) / static_cast<double>(k)}, 0.01, 10000, 17, false);
    REQUIRE(rows.size() == 1);
    const double p = bounds::ideal_failure_prob(k, m);
    const double se = std::sqrt(p * (1 - p) / (10000.0 * static_cast<double>(k)));
    CAPTURE(k);
    CHECK(rows[0].m == m);
    CHECK(std::abs(rows[0].first_iteration_failure_rate - p) <= 3 * se);
  }
}

TEST_CASE("ideal sweep edge rows") {
  const auto rows = ideal_sweep({2}, {0.0, 1.5}, 0.05, 200, 3, false);
  CHECK(rows[0].m == 0);
  CHECK(rows[0].full_recovery_rate == 0.0);
  CHECK(rows[1].m == 3);
  CHECK(rows[1].full_recovery_rate == 1.0);
  std::ostringstream os;
  write_ideal_sweep(os, rows);
  CHECK(os.str().rfind("k,m,m_over_k,fresh,trials,", 0) == 0);
  CHECK_THROWS_AS(ideal_sweep({2}, {1.0}, 0.05, 0, 3, false), std::invalid_argument);
}

TEST_CASE("more measurements never hurt under coupled seeds") {
  double prev_mean = 0.0;
  for (std::int64_t m = 20; m <= 80; m += 10) {
    double sum = 0.0;
    for (std::uint64_t t = 0; t < 500; ++t) {
      const std::uint64_t seed = derive_seed(5, t);
      const IdealOutcome a = simulate_ideal({20, m, false, seed});
      const IdealOutcome b = simulate_ideal({20, m + 1, false, seed});
      // Measurement j draws from the same substream in both runs, so the
      // extra measurement only adds first-iteration hits.
      CHECK(b.first_iteration_failures <= a.first_iteration_failures);
      sum += static_cast<double>(a.recovered);
    }
    CHECK(sum / 500 >= prev_mean - 0.2);
    prev_mean = sum / 500;
  }
}

TEST_CASE("fresh projections: second-iteration success matches the two-hit law") {
  const std::int64_t k = 50, m = 120;
  double survivors = 0, recovered = 0, expected = 0, var = 0;
  for (std::uint64_t t = 0; t < 4000; ++t) {
    const IdealOutcome out = simulate_ideal({k, m, true, derive_seed(8, t)});
    if (out.trace.size() < 2) continue;
    const auto& it = out.trace[1];
    const double p = 1.0 - bounds::ideal_failure_prob(it.unrecovered_before, m);
    survivors += static_cast<double>(it.unrecovered_before);
    recovered += static_cast<double>(it.recovered);
    expected += p * static_cast<double>(it.unrecovered_before);
    var += p * (1 - p) * static_cast<double>(it.unrecovered_before);
  }
  REQUIRE(survivors > 0);
  CHECK(std::abs(recovered - expected) <= 3 * std::sqrt(var));
  MESSAGE("second-iteration success ", recovered / survivors);
}
