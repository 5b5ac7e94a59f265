#include "l0rec/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "l0rec/rng.hpp"
#include "l0rec/stable.hpp"

namespace l0rec::bounds {

namespace {

constexpr double kPi = std::numbers::pi;

void require_small_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0 / 3.0)) throw std::invalid_argument("alpha must lie in (0, 1/3)");
}

// Smallest u in (0, 1) where the monotone predicate becomes true, by
// bisection on log u. Returns 1 when even u -> 1 fails.
template <typename Feasible>
double first_feasible(Feasible feasible) {
  constexpr double kTop = 1.0 - 1e-15;
  if (!feasible(kTop)) return 1.0;
  double lo = std::log(1e-300);
  double hi = std::log(kTop);
  if (feasible(std::exp(lo))) return std::exp(lo);
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(std::exp(mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return std::exp(hi);
}

double log_binomial_pmf(std::int64_t m, double q, std::int64_t k) {
  const auto mm = static_cast<double>(m);
  const auto kk = static_cast<double>(k);
  // lgamma(M + 1) carries an absolute error of ~ulp(M log M); for the small
  // k used here the product form of C(M, k) is far more accurate.
  const auto small = std::min(k, m - k);
  double log_choose = 0.0;
  if (small <= 256) {
    for (std::int64_t i = 0; i < small; ++i) {
      log_choose += std::log(static_cast<double>(m - i) / static_cast<double>(i + 1));
    }
  } else {
    log_choose = std::lgamma(mm + 1) - std::lgamma(kk + 1) - std::lgamma(mm - kk + 1);
  }
  return log_choose + kk * std::log(q) + (mm - kk) * std::log1p(-q);
}

EpsilonSuggestion decade_below(double threshold) {
  if (!(threshold > 0.0)) return {threshold, 0.0};
  if (std::isinf(threshold)) return {threshold, 1e-3};
  double p = std::floor(std::log10(threshold));
  if (std::pow(10.0, p) >= threshold) p -= 1.0;
  return {threshold, std::min(1e-3, std::pow(10.0, p))};
}

}  // namespace

const char* formula_name(Formula f) {
  switch (f) {
    case Formula::kFpBound: return "fp_bound";
    case Formula::kFnBound: return "fn_bound";
    case Formula::kMultiplicativeFpBound: return "multiplicative_fp_bound";
    case Formula::kGapErrorBound: return "gap_error_bound";
    case Formula::kRequiredM: return "required_m";
    case Formula::kM0: return "m0";
    case Formula::kSuggestEpsilon: return "suggest_epsilon";
    case Formula::kIdealFailure: return "ideal_failure_prob";
    case Formula::kIdealRequiredM: return "ideal_required_m";
    case Formula::kIdealTotalM: return "ideal_total_m";
  }
  return "unknown";
}

double mu1(double alpha) {
  require_small_alpha(alpha);
  const double d = 2.0 - 2.0 * alpha;
  return std::tgamma(1.0 / d) * std::tgamma((1.0 - 3.0 * alpha) / d) / std::tgamma((2.0 - 3.0 * alpha) / d) / kPi;
}

double mu2(double alpha) {
  require_small_alpha(alpha);
  return 1.0 / std::cos(kPi * alpha / (2.0 - 2.0 * alpha));
}

double c_alpha(double alpha) {
  const double m1 = mu1(alpha);
  const double m2 = mu2(alpha);
  const double e = (1.0 - alpha) / (1.0 + alpha);
  return m1 * m2 + std::pow(m2 * (1.0 - alpha), e) * std::pow((1.0 - alpha) / alpha, 2.0 * alpha / (1.0 + alpha)) *
                       ((1.0 + alpha) / (1.0 - alpha)) / kPi;
}

double f_upper(double t, double alpha) {
  require_small_alpha(alpha);
  if (!(t > 0.0)) return 0.0;
  const double v = c_alpha(alpha) * std::pow(t, (1.0 - alpha) / (1.0 + alpha)) *
                   std::max(1.0, std::pow(t, 2.0 * alpha / (1.0 + alpha)));
  return std::min(1.0, v);
}

std::vector<MonteCarloEstimate> f_monte_carlo_grid(const std::vector<double>& ts, double alpha, std::int64_t n,
                                                    std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("f_monte_carlo needs n >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("f_monte_carlo needs 0 < alpha < 1");
  const double expo = alpha / (1.0 - alpha);
  CounterStream rng(seed, Stream::kMonteCarlo);
  auto draw_log_abs = [&] {
    const UniformPair p = rng.next_pair();
    return cms_log_abs((p.first - 0.5) * kPi, -std::log(p.second), alpha);
  };
  std::vector<double> log_q(static_cast<std::size_t>(n));
  for (auto& v : log_q) {
    const double l1 = draw_log_abs();
    const double l2 = draw_log_abs();
    v = expo * (l2 - l1);
  }
  std::sort(log_q.begin(), log_q.end());
  std::vector<MonteCarloEstimate> out;
  out.reserve(ts.size());
  const auto nn = static_cast<double>(n);
  for (double t : ts) {
    if (!(t > 0.0)) {
      out.push_back({0.0, 0.0});
      continue;
    }
    const double lt = std::log(t);
    const auto count = std::upper_bound(log_q.begin(), log_q.end(), lt) - log_q.begin();
    const double p = static_cast<double>(count) / nn;
    out.push_back({p, std::sqrt(p * (1.0 - p) / nn)});
  }
  return out;
}

MonteCarloEstimate f_monte_carlo(double t, double alpha, std::int64_t n, std::uint64_t seed) {
  return f_monte_carlo_grid({t}, alpha, n, seed).front();
}

double eta(double k, double gamma, double c0) {
  if (!(k > 1.0)) throw std::invalid_argument("eta needs k > 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("eta needs gamma > 0");
  return first_feasible([&](double u) {
    const double l = std::log(u / (2.0 * k));
    const double first = c0 * std::exp(gamma * std::log(-std::expm1(l / k)));
    const double second = std::exp(gamma * std::log1p(-u / (2.0 * k)));
    return first + second <= 1.0;
  });
}

double eta_upper(double k, double gamma, double c0) {
  if (!(k > 1.0)) throw std::invalid_argument("eta_upper needs k > 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("eta_upper needs gamma > 0");
  return first_feasible([&](double u) {
    const double g = std::log(c0) + gamma * std::log(std::log(2.0 * k / u)) - gamma * std::log(k) +
                     std::log1p(2.0 * k / (u * gamma));
    return g <= 0.0;
  });
}

double binomial_cdf_below(std::int64_t m, double q, std::int64_t k) {
  if (m < 0) throw std::invalid_argument("binomial size must be >= 0");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("binomial probability must lie in [0, 1]");
  if (k <= 0) return 0.0;
  if (k > m) return 1.0;
  if (q == 0.0) return 1.0;
  if (q == 1.0) return 0.0;
  double sum = 0.0;
  for (std::int64_t j = 0; j < k; ++j) sum += std::exp(log_binomial_pmf(m, q, j));
  return std::min(1.0, sum);
}

BoundResult gap_error_bound(std::int64_t m, double k_star_value, double alpha) {
  BoundResult r;
  r.formula = Formula::kGapErrorBound;
  r.inputs = {{"M", static_cast<double>(m)}, {"k_star", k_star_value}, {"alpha", alpha}};
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(k_star_value > 0.0)) throw std::invalid_argument("K* must be positive");
  r.value = 1.0;
  const double ratio = static_cast<double>(m) / k_star_value;
  // a0 > 1 with a0 k0 <= M/K* means k0 < M/K*; the binomial term is smallest
  // at the largest admissible q, which is 1/K* for every k0.
  const auto k0_max = static_cast<std::int64_t>(std::ceil(ratio)) - 1;
  if (k0_max < 2 || m < 4) {
    r.assumptions_hold = false;
    return r;
  }
  const double gamma = (1.0 - alpha) / alpha;
  const double q = 1.0 / k_star_value;
  if (q >= 1.0) {
    r.assumptions_hold = false;
    return r;
  }

  // tail[k] = sum_{k' >= k} (1 + 1/2k') eta_{k'}, cut off once terms are negligible.
  std::vector<double> terms;
  for (std::int64_t k = 2; k <= m - 2; ++k) {
    const auto kd = static_cast<double>(k);
    const double e = k <= 50 ? eta(kd, gamma, 2.0) : eta_upper(kd, gamma, 2.0);
    const double term = (1.0 + 1.0 / (2.0 * kd)) * e;
    terms.push_back(term);
    if (k > 50 && term < 1e-18) break;
  }
  std::vector<double> tail(terms.size() + 1, 0.0);
  for (std::size_t idx = terms.size(); idx-- > 0;) tail[idx] = tail[idx + 1] + terms[idx];

  double best = 1.0;
  double cdf = 0.0;  // Pr(Bin < k0), built incrementally
  for (std::int64_t j = 0; j < 2; ++j) cdf += std::exp(log_binomial_pmf(m, q, j));
  for (std::int64_t k0 = 2; k0 <= k0_max; ++k0) {
    if (k0 > 2) cdf += std::exp(log_binomial_pmf(m, q, k0 - 1));
    const auto idx = static_cast<std::size_t>(k0 - 2);
    const double t = idx < tail.size() ? tail[idx] : 0.0;
    best = std::min(best, cdf + t);
  }
  r.value = std::clamp(best, 0.0, 1.0);
  return r;
}

double psi(double epsilon, double theta, double alpha) {
  if (!(epsilon > 0.0 && theta > 0.0)) throw std::invalid_argument("psi needs epsilon > 0 and theta > 0");
  return std::exp(alpha / (1.0 - alpha) * (std::log(epsilon) - std::log(theta)));
}

double psi_from_pow(double epsilon, double theta_pow, double alpha) {
  if (!(epsilon > 0.0 && theta_pow > 0.0)) throw std::invalid_argument("psi needs epsilon > 0 and theta > 0");
  // log theta = log(theta^alpha) / alpha
  return std::exp(alpha / (1.0 - alpha) * std::log(epsilon) - std::log(theta_pow) / (1.0 - alpha));
}

double k_star(double psi_value) {
  if (!(psi_value > 0.0)) throw std::invalid_argument("K* needs psi > 0");
  return 1.0 / psi_value - 1.0;
}

BoundResult fp_bound(std::int64_t m, double psi_value) {
  BoundResult r;
  r.formula = Formula::kFpBound;
  r.inputs = {{"M", static_cast<double>(m)}, {"psi", psi_value}};
  if (m < 0 || !(psi_value >= 0.0)) throw std::invalid_argument("fp_bound needs M >= 0 and psi >= 0");
  r.assumptions_hold = psi_value <= 1.0 / 3.0;
  r.value = std::exp(-static_cast<double>(m) * std::log1p(psi_value));
  return r;
}

BoundResult required_m(std::int64_t n, std::int64_t k, double delta, double psi_value) {
  BoundResult r;
  r.formula = Formula::kRequiredM;
  r.inputs = {{"N", static_cast<double>(n)}, {"K", static_cast<double>(k)}, {"delta", delta}, {"psi", psi_value}};
  if (!(n > k && k >= 0)) throw std::invalid_argument("required_m needs N > K >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(psi_value > 0.0)) throw std::invalid_argument("required_m needs psi > 0");
  r.assumptions_hold = psi_value <= 1.0 / 3.0;
  r.value = std::ceil(std::log(static_cast<double>(n - k) / delta) / std::log1p(psi_value));
  return r;
}

double m0(std::int64_t n, std::int64_t k, double delta) {
  if (!(n > k && k >= 0)) throw std::invalid_argument("m0 needs N > K >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  return static_cast<double>(k) * std::log(static_cast<double>(n - k) / delta);
}

BoundResult fn_bound(std::int64_t m, double x_abs, double epsilon, double theta_i, double alpha) {
  BoundResult r;
  r.formula = Formula::kFnBound;
  r.inputs = {{"M", static_cast<double>(m)}, {"x_abs", x_abs}, {"epsilon", epsilon}, {"theta_i", theta_i},
              {"alpha", alpha}};
  if (m < 0 || !(epsilon >= 0.0) || !(theta_i > 0.0) || !(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("fn_bound needs M >= 0, epsilon >= 0, theta_i > 0, 0 < alpha < 1");
  }
  const double hi = x_abs + epsilon;
  const double t_hi = std::exp(alpha / (1.0 - alpha) * (std::log(hi) - std::log(theta_i)));
  r.assumptions_hold = alpha <= 0.05 && t_hi < 1.0 / 3.0 && x_abs > epsilon;
  if (m == 0 || epsilon == 0.0) {
    r.value = 0.0;
    return r;
  }
  // 1 - ((|x|-eps)/(|x|+eps))^(a/(1-a)), via log1p/expm1 to keep digits
  // when eps << |x|.
  const double width =
      x_abs > epsilon ? -std::expm1(alpha / (1.0 - alpha) * std::log1p(-2.0 * epsilon / hi)) : 1.0;
  const double lead = 0.75 * std::exp(alpha / (1.0 + alpha) * (std::log(hi) - std::log(theta_i)));
  const double p = std::min(1.0, lead * width);
  r.value = std::clamp(-std::expm1(static_cast<double>(m) * std::log1p(-p)), 0.0, 1.0);
  return r;
}

EpsilonSuggestion suggest_epsilon(std::int64_t n, std::int64_t k, double delta, double alpha) {
  if (!(n > k && k >= 1)) throw std::invalid_argument("suggest_epsilon needs N > K >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  const double denom = 1.5 * alpha * static_cast<double>(k) * std::log(static_cast<double>(n - k) / delta);
  return decade_below(denom > 0.0 ? delta / denom : INFINITY);
}

EpsilonSuggestion suggest_epsilon(std::int64_t n, double delta, double alpha, const std::vector<double>& magnitudes) {
  const auto k = static_cast<std::int64_t>(magnitudes.size());
  if (!(n > k && k >= 1)) throw std::invalid_argument("suggest_epsilon needs N > K >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  double inv_sum = 0.0;
  for (double v : magnitudes) {
    if (!(std::abs(v) > 0.0)) throw std::invalid_argument("magnitudes must be nonzero");
    inv_sum += 1.0 / std::abs(v);
  }
  // sum_i eps/|x_i| < delta / (1.5 alpha log((N-K)/delta))
  const double denom = 1.5 * alpha * std::log(static_cast<double>(n - k) / delta);
  return decade_below(denom > 0.0 ? delta / denom / inv_sum : INFINITY);
}

BoundResult multiplicative_fp_bound(double psi_value, double alpha, const Vector& rho) {
  BoundResult r;
  r.formula = Formula::kMultiplicativeFpBound;
  r.inputs = {{"M", static_cast<double>(rho.size())}, {"psi", psi_value}, {"alpha", alpha}};
  if (!(psi_value >= 0.0) || !(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("multiplicative_fp_bound needs psi >= 0 and 0 < alpha < 1");
  }
  const double expo = alpha / (1.0 - alpha);
  double log_prod = 0.0;
  for (Index j = 0; j < rho.size(); ++j) {
    if (!(rho[j] > 0.0)) throw std::invalid_argument("rho must be positive");
    const double a = psi_value / std::pow(rho[j], expo);
    if (!(a < 1.0 / 3.0)) r.assumptions_hold = false;
    log_prod -= std::log1p(a);
  }
  r.value = std::exp(log_prod);
  return r;
}

double ideal_failure_prob(std::int64_t k, std::int64_t m) {
  if (k < 1 || m < 0) throw std::invalid_argument("ideal_failure_prob needs K >= 1 and M >= 0");
  if (m == 0) return 1.0;
  const double keep = 1.0 - 1.0 / static_cast<double>(k);
  const auto mm = static_cast<double>(m);
  const double v = std::pow(keep, mm) + mm / static_cast<double>(k) * std::pow(keep, mm - 1.0);
  return std::clamp(v, 0.0, 1.0);
}

std::int64_t ideal_required_m(std::int64_t k, double delta) {
  if (k < 1) throw std::invalid_argument("ideal_required_m needs K >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  // p_ideal is non-increasing in M: bracket by doubling, then bisect.
  std::int64_t hi = 2;
  while (ideal_failure_prob(k, hi) > delta) hi *= 2;
  std::int64_t lo = 0;  // p(0) = 1 > delta
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (ideal_failure_prob(k, mid) <= delta) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double ideal_total_m(std::int64_t k, double delta) {
  if (k < 1) throw std::invalid_argument("ideal_total_m needs K >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  return 1.6 * static_cast<double>(k) * std::log(1.0 / delta) / (1.0 - delta);
}

}  // namespace l0rec::bounds
