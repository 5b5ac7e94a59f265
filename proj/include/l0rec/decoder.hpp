#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "l0rec/encoder.hpp"
#include "l0rec/stable.hpp"

namespace l0rec {

struct RecoveryConfig {
  double epsilon = 1e-5;
  std::optional<double> gap_epsilon;  // defaults to epsilon
  int max_iterations = 3;
  std::optional<double> alpha;        // when set, must equal the matrix alpha

  double gap_eps() const { return gap_epsilon.value_or(epsilon); }
  void validate() const;
};

struct RatioStats {
  Vector z;
  Index non_finite = 0;
};

/// z_j = y_j / s_ij with IEEE semantics; non-finite ratios are counted.
RatioStats ratio_stats(const Vector& y, const SeededDesignMatrix& mat, Index i);
RatioStats ratio_stats(const MeasurementVector& meas, const SeededDesignMatrix& mat, Index i);

struct MinEstimate {
  double value;
  Index index;
  bool declared_zero;
};

/// Ratio of smallest magnitude (ties go to the smallest j). Throws
/// std::invalid_argument when no ratio is finite.
MinEstimate min_estimate(const RatioStats& stats, double epsilon);

/// Midpoint of the closest pair among the sorted finite ratios, or nullopt
/// when that gap exceeds gap_epsilon. Equal gaps prefer the smaller
/// |midpoint|, then the lower sorted position. Throws std::invalid_argument
/// with fewer than two finite ratios.
std::optional<double> gap_estimate(const RatioStats& stats, double gap_epsilon);

struct IterationRecord {
  int iteration;
  Index undetermined;
  double residual_norm;
};

struct RecoveryReport {
  SparseSignal x_hat;
  int iterations_run = 0;
  std::vector<IterationRecord> iterations;
  std::vector<Index> min_survivors;  // coordinates not declared zero by the minimum estimator
  std::vector<Index> undetermined;   // still undetermined at exit
  double wall_seconds = 0.0;
};

RecoveryReport recover(const MeasurementVector& meas, const SeededDesignMatrix& mat, const RecoveryConfig& cfg = {});

/// r = y - x_hat S with the x_hat S sum taken in ascending i, as in measure().
Vector residual(const Vector& y, const SparseSignal& x_hat, const SeededDesignMatrix& mat);
Vector residual(const MeasurementVector& meas, const SparseSignal& x_hat, const SeededDesignMatrix& mat);

struct KEstimate {
  double value;
  bool degenerate;  // some y_j == 0
};

/// Harmonic-mean estimate of theta^alpha (close to K for small alpha).
KEstimate estimate_k(const Vector& y, double alpha);

/// Report file: `# estimates` section (i,x_hat over the support) then
/// `# iterations` section (iteration,undetermined,residual_norm).
void write_report(std::ostream& os, const RecoveryReport& report, bool include_timing = false);

}  // namespace l0rec
