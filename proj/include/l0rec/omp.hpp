#pragma once

#include <vector>

#include "l0rec/encoder.hpp"
#include "l0rec/stable.hpp"

namespace l0rec {

struct OmpConfig {
  Index k_iterations = 1;
  double residual_tolerance = 0.0;  // optional early stop on ||r||; 0 stops only on an exact fit
};

struct OmpResult {
  SparseSignal x_hat;
  std::vector<Index> selected;        // in selection order
  std::vector<double> residual_norms;  // after each step
};

/// s_ij of an alpha = 2 matrix: N(0, 2), built from the same (u, w) draws that
/// the stable matrix with this seed uses.
double gaussian_entry(const SeededDesignMatrix& mat, Index i, Index j);

/// Greedy selection by |<phi_i, r>| / ||phi_i|| followed by a full least-squares
/// refit (column-pivoted Householder QR) of every selected column. Throws
/// std::runtime_error when the selected columns are rank-deficient.
OmpResult omp_decode(const Vector& y, const SeededDesignMatrix& mat, const OmpConfig& cfg);
OmpResult omp_decode(const MeasurementVector& meas, const SeededDesignMatrix& mat, const OmpConfig& cfg);

}  // namespace l0rec
