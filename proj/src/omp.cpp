#include "l0rec/omp.hpp"

#include <Eigen/QR>

#include <stdexcept>
#include <string>

#include "l0rec/parallel.hpp"

namespace l0rec {

namespace {

void require_gaussian(const SeededDesignMatrix& mat) {
  if (mat.alpha() != 2.0) throw std::invalid_argument("OMP needs the alpha = 2 design matrix");
}

}  // namespace

double gaussian_entry(const SeededDesignMatrix& mat, Index i, Index j) {
  require_gaussian(mat);
  return mat.entry(i, j);
}

OmpResult omp_decode(const Vector& y, const SeededDesignMatrix& mat, const OmpConfig& cfg) {
  require_gaussian(mat);
  const Index n = mat.rows();
  const Index m = mat.cols();
  if (y.size() != m) throw std::invalid_argument("measurement length does not match M");
  if (cfg.k_iterations < 1 || cfg.k_iterations > m) throw std::invalid_argument("OMP needs 1 <= iterations <= M");

  // Phi is M x N: column i is row i of S.
  Matrix phi(m, n);
  parallel_for(0, n, [&](Index i) { mat.row_into(i, phi.col(i)); });
  const Vector col_norms = phi.colwise().norm().transpose();

  OmpResult out;
  out.x_hat = SparseSignal::Zero(n);
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  Vector r = y;
  Vector coef;
  for (Index step = 0; step < cfg.k_iterations; ++step) {
    const Vector corr = phi.transpose() * r;
    Index best = -1;
    double best_score = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      const double score = std::abs(corr[i]) / col_norms[i];
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    if (best < 0) break;  // residual orthogonal to every remaining column
    taken[static_cast<std::size_t>(best)] = 1;
    out.selected.push_back(best);

    const auto s = static_cast<Index>(out.selected.size());
    Matrix sub(m, s);
    for (Index c = 0; c < s; ++c) sub.col(c) = phi.col(out.selected[static_cast<std::size_t>(c)]);
    Eigen::ColPivHouseholderQR<Matrix> qr(sub);
    if (qr.rank() < s) {
      throw std::runtime_error("OMP: selected columns are rank-deficient at step " + std::to_string(step + 1) +
                               " (rank " + std::to_string(qr.rank()) + " < " + std::to_string(s) + ")");
    }
    coef = qr.solve(y);
    r = y - sub * coef;
    out.residual_norms.push_back(r.norm());
    if (out.residual_norms.back() <= cfg.residual_tolerance) break;
  }
  for (std::size_t c = 0; c < out.selected.size(); ++c) out.x_hat[out.selected[c]] = coef[static_cast<Index>(c)];
  return out;
}

OmpResult omp_decode(const MeasurementVector& meas, const SeededDesignMatrix& mat, const OmpConfig& cfg) {
  return omp_decode(meas.y, mat, cfg);
}

}  // namespace l0rec
