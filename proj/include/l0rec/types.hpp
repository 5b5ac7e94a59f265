#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace l0rec {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Length-N signal stored densely; its support is the set of nonzero entries.
using SparseSignal = Eigen::VectorXd;

/// Ascending indices of the nonzero entries of `x`.
template <typename Derived>
std::vector<Index> support_of(const Eigen::MatrixBase<Derived>& x) {
  std::vector<Index> s;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0) s.push_back(i);
  }
  return s;
}

}  // namespace l0rec
