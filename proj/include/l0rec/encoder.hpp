#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "l0rec/stable.hpp"
#include "l0rec/types.hpp"

namespace l0rec {

/// Everything needed to regenerate the design matrix a measurement came from.
struct MatrixIdentity {
  std::uint64_t seed = 0;
  double alpha = kDefaultAlpha;
  Index n = 0;
  Index m = 0;
  double overflow_cap = 1e300;

  static MatrixIdentity of(const SeededDesignMatrix& mat);
  SeededDesignMatrix regenerate() const;
  bool operator==(const MatrixIdentity&) const = default;
};

struct NoiseStep {
  enum class Kind { kAdditive, kMultiplicative };
  Kind kind = Kind::kAdditive;
  double sigma = 0.0;          // additive: per-measurement standard deviation actually used
  std::uint64_t seed = 0;      // additive
  Vector rho;                  // multiplicative

  std::string describe() const;
};

struct MeasurementVector {
  Vector y;
  MatrixIdentity matrix;
  std::vector<NoiseStep> noise;  // empty: noiseless

  Index size() const { return y.size(); }
  std::string noise_description() const;
};

/// y = x S, touching only the rows of S in the support of x (ascending i).
MeasurementVector measure(const SparseSignal& x, const SeededDesignMatrix& mat);

/// Turnstile update x_i += delta: y_j += delta * s_ij for every j.
void turnstile_update(MeasurementVector& meas, const SeededDesignMatrix& mat, Index i, double delta);

/// Additive i.i.d. Gaussian noise. Per-measurement variance is sigma^2, or
/// sigma^2 * N with `scale_by_n` (the convention written in some CS texts).
void add_noise(MeasurementVector& meas, double sigma, std::uint64_t noise_seed, bool scale_by_n = false);

/// y_j <- rho_j y_j with all rho_j > 0.
void apply_multiplicative(MeasurementVector& meas, const Vector& rho);

/// Standard multiplicative patterns: "const:<r>" or "alternating:<r>" (r, 1/r, r, ...).
Vector rho_pattern(const std::string& pattern, Index m);

// Measurement file: RFC-4180 CSV, LF endings. A `key,value` header block
// (format, seed, alpha, n, m, overflow_cap, noise) is followed by a `j,y`
// header and M data rows. Floats use 17 significant digits.
void write_measurements(std::ostream& os, const MeasurementVector& meas);
MeasurementVector read_measurements(std::istream& is);

}  // namespace l0rec
