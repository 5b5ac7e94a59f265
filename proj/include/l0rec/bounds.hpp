#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "l0rec/types.hpp"

namespace l0rec::bounds {

enum class Formula {
  kFpBound,
  kFnBound,
  kMultiplicativeFpBound,
  kGapErrorBound,
  kRequiredM,
  kM0,
  kSuggestEpsilon,
  kIdealFailure,
  kIdealRequiredM,
  kIdealTotalM,
};

const char* formula_name(Formula f);

struct BoundResult {
  double value = 0.0;
  Formula formula = Formula::kFpBound;
  bool assumptions_hold = true;
  std::vector<std::pair<std::string, double>> inputs;
};

// F_alpha(t) = Pr(|S2/S1|^(alpha/(1-alpha)) <= t) and its closed-form brackets.

/// max{(1/2)/(1+1/t), 1/(1+1/t) when t <= 1/3}; 0 at t = 0.
template <typename Scalar>
Scalar f_lower(Scalar t) {
  if (!(t > 0)) return Scalar(0);
  const Scalar base = 1 / (1 + 1 / t);
  return t <= Scalar(1) / 3 ? base : base / 2;
}

double mu1(double alpha);
double mu2(double alpha);
double c_alpha(double alpha);

/// min{1, C_alpha t^((1-a)/(1+a)) max{1, t^(2a/(1+a))}}. Requires 0 < alpha < 1/3.
double f_upper(double t, double alpha);

struct MonteCarloEstimate {
  double estimate;
  double std_error;
};

/// Empirical F_alpha(t) from n CMS pairs (computed in log space).
MonteCarloEstimate f_monte_carlo(double t, double alpha, std::int64_t n, std::uint64_t seed);

/// Same n pairs evaluated at every t in the grid.
std::vector<MonteCarloEstimate> f_monte_carlo_grid(const std::vector<double>& ts, double alpha, std::int64_t n,
                                                    std::uint64_t seed);

/// Smallest u in (0,1) with c0 (1 - (u/2k)^(1/k))^gamma + (1 - u/2k)^gamma <= 1,
/// to relative precision ~1e-12; 1 when no u < 1 qualifies.
double eta(double k, double gamma, double c0 = 2.0);

/// Smallest u in (0,1) with
/// log c0 + gamma log log(2k/u) - gamma log k + log(1 + 2k/(u gamma)) <= 0.
double eta_upper(double k, double gamma, double c0 = 2.0);

/// Pr(Binomial(m, q) < k), summed exactly in log space.
double binomial_cdf_below(std::int64_t m, double q, std::int64_t k);

/// Error-probability bound G_{M,K*} for the gap estimator; 1 when infeasible.
BoundResult gap_error_bound(std::int64_t m, double k_star, double alpha);

/// psi = (epsilon/theta)^(alpha/(1-alpha)). The _pow form takes theta^alpha,
/// which stays representable for any realistic K.
double psi(double epsilon, double theta, double alpha);
double psi_from_pow(double epsilon, double theta_pow, double alpha);

/// K* = 1/psi - 1.
double k_star(double psi_value);

BoundResult fp_bound(std::int64_t m, double psi_value);
BoundResult required_m(std::int64_t n, std::int64_t k, double delta, double psi_value);
double m0(std::int64_t n, std::int64_t k, double delta);

BoundResult fn_bound(std::int64_t m, double x_abs, double epsilon, double theta_i, double alpha);

struct EpsilonSuggestion {
  double threshold;  // epsilon must stay strictly below this
  double suggested;  // largest power of ten below threshold, at most 1e-3
};

/// Sign signals (all |x_i| = 1).
EpsilonSuggestion suggest_epsilon(std::int64_t n, std::int64_t k, double delta, double alpha);
/// General signals: magnitudes of the nonzero coordinates.
EpsilonSuggestion suggest_epsilon(std::int64_t n, double delta, double alpha, const std::vector<double>& magnitudes);

BoundResult multiplicative_fp_bound(double psi_value, double alpha, const Vector& rho);

/// (1 - 1/K)^M + (M/K)(1 - 1/K)^(M-1).
double ideal_failure_prob(std::int64_t k, std::int64_t m);
std::int64_t ideal_required_m(std::int64_t k, double delta);
/// 1.6 K log(1/delta) / (1 - delta).
double ideal_total_m(std::int64_t k, double delta);

}  // namespace l0rec::bounds
