#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "l0rec/bounds.hpp"

using namespace l0rec;
using namespace l0rec::bounds;

namespace {

using LD = long double;

LD eta_lhs(LD u, LD k, LD gamma, LD c0) {
  return c0 * std::pow(-std::expm1(std::log(u / (2 * k)) / k), gamma) + std::pow(1 - u / (2 * k), gamma);
}

bool eta_holds(LD u, LD k, LD gamma, LD c0) { return eta_lhs(u, k, gamma, c0) <= 1; }

bool eta_upper_holds(LD u, LD k, LD gamma, LD c0) {
  return c0 * std::pow(std::log(2 * k / u) / k, gamma) * (1 + 2 * k / (u * gamma)) <= 1;
}

// First grid point in [lo, hi) where pred holds, refined by successively
// finer scans of the bracketing cell.
double grid_first(const std::function<bool(LD)>& pred, LD lo, LD hi, LD step, LD final_step) {
  while (true) {
    LD u = lo;
    while (u < hi && !pred(u)) u += step;
    if (u >= hi) return 1.0;
    if (step <= final_step) return static_cast<double>(u);
    lo = std::max(lo, u - step);
    hi = u + step;
    step /= 1000;
  }
}

LD exact_binomial_cdf_below(int m, LD q, int k) {
  LD sum = 0;
  for (int j = 0; j < k && j <= m; ++j) {
    sum += std::exp(std::lgamma(static_cast<LD>(m + 1)) - std::lgamma(static_cast<LD>(j + 1)) -
                    std::lgamma(static_cast<LD>(m - j + 1)) + j * std::log(q) + (m - j) * std::log1p(-q));
  }
  return sum;
}

double gamma_of(double alpha) { return (1.0 - alpha) / alpha; }

}  // namespace

TEST_CASE("f_lower examples") {
  CHECK(f_lower(0.0) == 0.0);
  CHECK(f_lower(1.0 / 3.0) == doctest::Approx(0.25));
  CHECK(f_lower(1.0) == doctest::Approx(0.25));
  CHECK(f_lower(0.1) == doctest::Approx(1.0 / 11.0));
}

TEST_CASE("C_alpha and mu2") {
  // C_alpha -> 1 + 1/pi, C_alpha < 1.5 for alpha <= 0.05, C_alpha < 2 for alpha <= 0.16.
  CHECK(c_alpha(1e-6) == doctest::Approx(1.0 + 1.0 / std::numbers::pi).epsilon(1e-4));
  for (double a = 0.001; a <= 0.05; a += 0.001) CHECK(c_alpha(a) < 1.5);
  for (double a = 0.05; a <= 0.16; a += 0.01) CHECK(c_alpha(a) < 2.0);
  CHECK(mu2(0.03) == doctest::Approx(1.0 / std::cos(std::numbers::pi * 0.03 / 1.94)).epsilon(1e-14));
  CHECK(mu2(0.03) == doctest::Approx(1.00118).epsilon(1e-5));
  CHECK_THROWS_AS(mu1(0.4), std::invalid_argument);
  CHECK_THROWS_AS(f_upper(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("f_lower <= f_upper") {
  for (double a : {0.001, 0.01, 0.03, 0.1, 0.2, 0.3}) {
    for (double lt = -8; lt <= 3; lt += 0.1) {
      const double t = std::pow(10.0, lt);
      CAPTURE(a);
      CAPTURE(t);
      CHECK(f_lower(t) <= f_upper(t, a));
    }
  }
}

TEST_CASE("f_monte_carlo limits and bracketing") {
  CHECK(f_monte_carlo(0.0, 0.03, 1000, 1).estimate == 0.0);
  const auto big = f_monte_carlo(1e9, 0.03, 100000, 1);
  CHECK(big.estimate >= 1.0 - 3.0 * std::max(big.std_error, 1e-5));
  std::vector<double> ts;
  for (int g = 1; g <= 20; ++g) ts.push_back(g / 20.0);
  for (double a : {0.03, 0.1}) {
    const auto est = f_monte_carlo_grid(ts, a, 100000, 7);
    for (std::size_t g = 0; g < ts.size(); ++g) {
      CHECK(f_lower(ts[g]) <= est[g].estimate + 3 * est[g].std_error);
      CHECK(est[g].estimate - 3 * est[g].std_error <= f_upper(ts[g], a));
    }
  }
  CHECK_THROWS_AS(f_monte_carlo(0.5, 0.03, 0, 1), std::invalid_argument);
}

TEST_CASE("eta against a grid scan") {
  const double g = gamma_of(0.03);
  const double e = eta(2, g);
  const double scan = grid_first([&](LD u) { return eta_holds(u, 2, g, 2); }, 1e-12L, 1.0L, 1e-6L, 1e-6L);
  MESSAGE("eta(2, gamma(0.03)) = ", e, " grid ", scan);
  CHECK(std::abs(e - scan) <= 1.01e-6);
  CHECK(eta(2, gamma_of(0.005)) == doctest::Approx(0.00122848).epsilon(1e-4));
}

TEST_CASE("eta is the smallest feasible point") {
  for (double k : {2.0, 3.0, 7.0, 20.0, 50.0}) {
    for (double a : {0.005, 0.01, 0.03, 0.05}) {
      const double e = eta(k, gamma_of(a));
      CAPTURE(k);
      CAPTURE(a);
      REQUIRE(e < 1.0);
      // The solver works in double, so allow rounding-level slack at the root.
      CHECK(eta_lhs(e, k, gamma_of(a), 2) <= 1 + 1e-12L);
      CHECK_FALSE(eta_holds(e * (1 - 1e-6), k, gamma_of(a), 2));
    }
  }
}

TEST_CASE("eta shrinks as gamma grows") {
  CHECK(eta(5, 1e4) < eta(5, 10));
  double prev = 1.0;
  for (double g : {5.0, 10.0, 30.0, 100.0, 300.0, 1000.0}) {
    const double e = eta(5, g);
    CHECK(e <= prev);
    prev = e;
  }
}

TEST_CASE("eta_upper dominates eta and stays finite") {
  for (int k = 2; k <= 50; ++k) {
    for (double a : {0.005, 0.01, 0.02, 0.03}) {
      CAPTURE(k);
      CAPTURE(a);
      CHECK(eta_upper(k, gamma_of(a)) >= eta(k, gamma_of(a)));
    }
  }
  const double big = eta_upper(1e4, gamma_of(0.01));
  CHECK(std::isfinite(big));
  CHECK(big >= 0.0);
  const double g = gamma_of(0.01);
  const double scan = grid_first([&](LD u) { return eta_upper_holds(u, 30, g, 2); }, 1e-300L, 1.0L, 1e-3L, 1e-11L);
  CHECK(std::abs(eta_upper(30, g) - scan) <= 1e-8);
}

TEST_CASE("binomial CDF matches exact summation") {
  for (int m : {1, 5, 40, 500, 10000}) {
    for (double q : {1e-4, 0.01, 0.2, 0.5, 0.9}) {
      for (int k : {1, 2, 3, 10}) {
        const LD oracle = exact_binomial_cdf_below(m, q, k);
        CAPTURE(m);
        CAPTURE(q);
        CAPTURE(k);
        CHECK(std::abs(binomial_cdf_below(m, q, k) - static_cast<double>(oracle)) <= 1e-12 * std::max<double>(oracle, 1e-300) + 1e-300);
      }
    }
  }
  CHECK(binomial_cdf_below(10, 0.3, 0) == 0.0);
  CHECK(binomial_cdf_below(10, 0.3, 11) == 1.0);
}

TEST_CASE("gap error bound reproduces the published table") {
  const double published[] = {0.042, 0.046, 0.084, 0.163};
  const double alphas[] = {0.005, 0.01, 0.03, 0.05};
  for (int q = 0; q < 4; ++q) {
    const double g = gap_error_bound(500, 100, alphas[q]).value;
    CAPTURE(alphas[q]);
    CHECK(g == doctest::Approx(published[q]).epsilon(0.10));
  }
  // Measurements needed for an error probability below 0.05.
  CHECK(gap_error_bound(500, 100, 0.005).value < 0.05);
  CHECK(gap_error_bound(500, 100, 0.01).value < 0.05);
  CHECK(gap_error_bound(700, 100, 0.03).value < 0.05);
  CHECK(gap_error_bound(1000, 100, 0.05).value < 0.05);
}

TEST_CASE("gap error bound edge cases and monotonicity") {
  CHECK(gap_error_bound(100, 100, 0.03).value == 1.0);
  CHECK(gap_error_bound(50, 100, 0.03).value == 1.0);
  CHECK_FALSE(gap_error_bound(50, 100, 0.03).assumptions_hold);
  for (double a : {0.005, 0.03}) {
    double prev = 1.0;
    for (int m = 100; m <= 2000; m += 25) {
      const double g = gap_error_bound(m, 100, a).value;
      CAPTURE(m);
      CHECK(g <= prev + 1e-15);
      prev = g;
    }
  }
}

TEST_CASE("gap error bound approaches the two-hit limit as alpha shrinks") {
  const double limit = binomial_cdf_below(500, 0.01, 2);
  double prev = INFINITY;
  for (double a : {0.01, 0.005, 0.001}) {
    const double d = std::abs(gap_error_bound(500, 100, a).value - limit);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("false positive bound and sample size") {
  CHECK(fp_bound(0, 0.1).value == 1.0);
  CHECK(m0(100000, 30, 0.01) == doctest::Approx(483.5).epsilon(1e-3));
  CHECK(m0(100000, 30, 0.01) == doctest::Approx(30 * std::log(99970 / 0.01)).epsilon(1e-14));
  for (double p : {1e-3, 0.01, 0.1, 0.3}) {
    for (std::int64_t k : {1, 30, 1000}) {
      const auto m = static_cast<std::int64_t>(required_m(100000, k, 0.01, p).value);
      CHECK(static_cast<double>(100000 - k) * std::pow(1 + p, -static_cast<double>(m)) <= 0.01);
      CHECK(static_cast<double>(100000 - k) * std::pow(1 + p, -static_cast<double>(m - 1)) > 0.01);
    }
  }
  CHECK_FALSE(fp_bound(10, 0.5).assumptions_hold);
  CHECK(psi(1e-5, 2.0, 0.5) == doctest::Approx(5e-6));
  CHECK(psi_from_pow(1e-5, std::pow(2.0, 0.5), 0.5) == doctest::Approx(psi(1e-5, 2.0, 0.5)).epsilon(1e-12));
  CHECK(k_star(0.01) == doctest::Approx(99.0));
}

TEST_CASE("false negative bound") {
  const double theta = std::pow(30.0, 1.0 / 0.03);
  CHECK(fn_bound(483, 1.0, 0.0, theta, 0.03).value == 0.0);
  CHECK(fn_bound(0, 1.0, 1e-5, theta, 0.03).value == 0.0);

  const LD a = 0.03L, x = 1.0L, e = 1e-5L, th = std::pow(30.0L, 1 / a);
  const LD width = -std::expm1(a / (1 - a) * (std::log1p(-e / x) - std::log1p(e / x)));
  const LD p = 0.75L * std::pow((x + e) / th, a / (1 + a)) * width;
  const LD oracle = -std::expm1(483.0L * std::log1p(-p));
  const BoundResult r = fn_bound(483, 1.0, 1e-5, theta, 0.03);
  CHECK(std::abs(r.value - static_cast<double>(oracle)) <= 1e-12 * static_cast<double>(oracle));
  CHECK(r.assumptions_hold);
}

TEST_CASE("epsilon suggestions") {
  CHECK(suggest_epsilon(100000, 100, 0.01, 0.03).suggested == 1e-4);
  CHECK(suggest_epsilon(100000, 1000, 0.01, 0.03).suggested == 1e-5);
  CHECK(suggest_epsilon(100000, 100, 0.01, 1e-12).suggested == 1e-3);
  CHECK(suggest_epsilon(100000, 100, 0.01, 0.0).suggested == 1e-3);
  const auto t = suggest_epsilon(100000, 100, 0.01, 0.03);
  CHECK(t.threshold == doctest::Approx(0.01 / (1.5 * 0.03 * 100 * std::log(99900 / 0.01))));
  // With unit magnitudes the general form reduces to the sign form.
  const auto g = suggest_epsilon(100000, 0.01, 0.03, std::vector<double>(100, -1.0));
  CHECK(g.threshold == doctest::Approx(t.threshold));
}

TEST_CASE("multiplicative false positive bound") {
  const double p = 0.02;
  CHECK(multiplicative_fp_bound(p, 0.03, Vector::Ones(200)).value == doctest::Approx(fp_bound(200, p).value).epsilon(1e-12));
  const double fp = fp_bound(200, p).value;
  const double five = multiplicative_fp_bound(p, 0.03, Vector::Constant(200, 5.0)).value;
  // Per-factor scaling is 5^(0.03/0.97) ~ 1.051; compare the log-bounds.
  CHECK(std::log(five) == doctest::Approx(std::log(fp)).epsilon(0.05));
  CHECK(multiplicative_fp_bound(p, 0.03, Vector(0)).value == 1.0);
}

TEST_CASE("idealized two-hit bounds") {
  CHECK(ideal_failure_prob(1, 2) == 0.0);
  CHECK(ideal_failure_prob(5, 0) == 1.0);
  for (std::int64_t k = 2; k <= 1000; ++k) {
    const std::int64_t m = ideal_required_m(k, 0.05);
    CHECK(static_cast<double>(m) <= 1.60 * static_cast<double>(k) * std::log(1 / 0.05));
    CHECK(ideal_failure_prob(k, m) <= 0.05);
    CHECK(ideal_failure_prob(k, m - 1) > 0.05);
  }
  CHECK(ideal_total_m(100, 0.05) / 100 == doctest::Approx(5.04).epsilon(0.01));
}
