#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include "l0rec/rng.hpp"
#include "l0rec/types.hpp"

namespace l0rec {

inline constexpr double kDefaultAlpha = 0.03;

struct StableParams {
  double alpha = kDefaultAlpha;
  double overflow_cap = 1e300;

  /// Throws std::invalid_argument unless 0 < alpha <= 2 and 1 < cap < inf.
  void validate() const;
};

/// Chambers-Mallows-Stuck transform of u ~ unif(-pi/2, pi/2), w ~ exp(1)
/// into a symmetric S(alpha, 1) variate:
///
///   Z = sin(alpha u) / cos(u)^(1/alpha) * [cos(u - alpha u) / w]^((1 - alpha) / alpha)
///
/// The direct product is tried first; when it overflows or underflows (common
/// near alpha = 0.03, where the second exponent is ~32) the result is rebuilt
/// from logarithms. The value may still be +-inf or 0, capping is the caller's job.
template <typename Scalar>
Scalar cms_transform(Scalar u, Scalar w, Scalar alpha) {
  using std::abs;
  using std::cos;
  using std::exp;
  using std::isfinite;
  using std::log;
  using std::pow;
  using std::sin;
  const Scalar half_pi = std::numbers::pi_v<Scalar> / 2;
  if (!(abs(u) < half_pi)) throw std::domain_error("cms_transform: u must lie in (-pi/2, pi/2)");
  if (!(w > 0)) throw std::domain_error("cms_transform: w must be positive");
  if (!(alpha > 0 && alpha <= 2)) throw std::domain_error("cms_transform: alpha must lie in (0, 2]");

  const Scalar s = sin(alpha * u);
  if (s == 0) return Scalar(0);
  const Scalar cu = cos(u);
  const Scalar c2 = cos(u - alpha * u);
  const Scalar gamma = (1 - alpha) / alpha;
  const Scalar z = s / pow(cu, 1 / alpha) * pow(c2 / w, gamma);
  if (isfinite(z) && z != 0) return z;
  const Scalar log_abs = log(abs(s)) - log(cu) / alpha + gamma * (log(c2) - log(w));
  return s > 0 ? exp(log_abs) : -exp(log_abs);
}

/// log|Z| for the CMS variate, never overflows. Used where only magnitudes
/// matter (ratio distributions at tiny alpha).
double cms_log_abs(double u, double w, double alpha);

/// The (u, w) pair behind entry (i, j) on a given retry. Shared by every alpha,
/// which is what allows side-by-side comparisons across design matrices.
struct StableDraw {
  double u;
  double w;
};

StableDraw stable_draw(std::uint64_t seed, Index i, Index j, std::uint32_t retry);

/// Virtual N x M matrix of i.i.d. S(alpha, 1) entries, fully determined by
/// (seed, alpha, N, M). Entries are regenerated on demand; no storage.
class SeededDesignMatrix {
 public:
  static constexpr std::uint32_t kMaxRetries = 64;

  SeededDesignMatrix(std::uint64_t seed, Index n, Index m, StableParams params = {});

  std::uint64_t seed() const { return seed_; }
  Index rows() const { return n_; }
  Index cols() const { return m_; }
  const StableParams& params() const { return params_; }
  double alpha() const { return params_.alpha; }

  /// s_ij. Resamples deterministically (retry counter) while |Z| exceeds the
  /// overflow cap or Z is zero.
  double entry(Index i, Index j) const;

  /// Row i (length M): the coefficients coordinate i contributes to y.
  Vector row(Index i) const;
  void row_into(Index i, Eigen::Ref<Vector> out) const;

  /// Dense N x M copy; only sensible for small problems and tests.
  Matrix materialize() const;

  /// Same seed and shape, different alpha: entries share their (u, w) draws.
  SeededDesignMatrix with_alpha(double alpha) const;

  bool same_identity(const SeededDesignMatrix& other) const;

 private:
  std::uint64_t seed_;
  Index n_;
  Index m_;
  StableParams params_;
};

/// Scale of x under stable projection: theta = (sum |x_i|^alpha)^(1/alpha).
/// Zero for the zero vector.
template <typename Derived>
double scale_param(const Eigen::MatrixBase<Derived>& x, double alpha) {
  double sum = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0) sum += std::pow(std::abs(static_cast<double>(x[i])), alpha);
  }
  if (sum == 0.0) return 0.0;
  return std::exp(std::log(sum) / alpha);
}

/// theta^alpha = sum |x_i|^alpha, which stays representable when theta does not.
template <typename Derived>
double scale_param_pow(const Eigen::MatrixBase<Derived>& x, double alpha) {
  double sum = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0) sum += std::pow(std::abs(static_cast<double>(x[i])), alpha);
  }
  return sum;
}

}  // namespace l0rec
