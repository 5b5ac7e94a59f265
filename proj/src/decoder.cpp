#include "l0rec/decoder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "l0rec/csv.hpp"
#include "l0rec/parallel.hpp"

namespace l0rec {

void RecoveryConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(gap_eps() > 0.0)) throw std::invalid_argument("gap_epsilon must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
}

RatioStats ratio_stats(const Vector& y, const SeededDesignMatrix& mat, Index i) {
  if (y.size() != mat.cols()) throw std::invalid_argument("measurement length does not match M");
  if (i < 0 || i >= mat.rows()) throw std::out_of_range("coordinate index out of range");
  RatioStats out;
  out.z.resize(y.size());
  for (Index j = 0; j < y.size(); ++j) {
    out.z[j] = y[j] / mat.entry(i, j);
    if (!std::isfinite(out.z[j])) ++out.non_finite;
  }
  return out;
}

RatioStats ratio_stats(const MeasurementVector& meas, const SeededDesignMatrix& mat, Index i) {
  return ratio_stats(meas.y, mat, i);
}

MinEstimate min_estimate(const RatioStats& stats, double epsilon) {
  Index best = -1;
  for (Index j = 0; j < stats.z.size(); ++j) {
    const double v = stats.z[j];
    if (!std::isfinite(v)) continue;
    if (best < 0 || std::abs(v) < std::abs(stats.z[best])) best = j;
  }
  if (best < 0) throw std::invalid_argument("min_estimate: no finite ratio");
  const double value = stats.z[best];
  return {value, best, std::abs(value) <= epsilon};
}

namespace {

// Sorts `v` (finite values only) in place.
std::optional<double> closest_pair_midpoint(std::vector<double>& v, double gap_epsilon) {
  if (v.size() < 2) throw std::invalid_argument("gap_estimate: fewer than two finite ratios");
  std::sort(v.begin(), v.end());
  double best_gap = INFINITY;
  double best_mid = 0.0;
  bool found = false;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    const double gap = v[k + 1] - v[k];
    const double mid = v[k] / 2 + v[k + 1] / 2;
    if (!found || gap < best_gap || (gap == best_gap && std::abs(mid) < std::abs(best_mid))) {
      best_gap = gap;
      best_mid = mid;
      found = true;
    }
  }
  if (best_gap > gap_epsilon) return std::nullopt;
  return best_mid;
}

enum class CoordState : char { kZero, kNonzero, kUndetermined };

}  // namespace

std::optional<double> gap_estimate(const RatioStats& stats, double gap_epsilon) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(stats.z.size()));
  for (Index j = 0; j < stats.z.size(); ++j) {
    if (std::isfinite(stats.z[j])) v.push_back(stats.z[j]);
  }
  return closest_pair_midpoint(v, gap_epsilon);
}

Vector residual(const Vector& y, const SparseSignal& x_hat, const SeededDesignMatrix& mat) {
  if (y.size() != mat.cols()) throw std::invalid_argument("measurement length does not match M");
  if (x_hat.size() != mat.rows()) throw std::invalid_argument("estimate length does not match N");
  const auto support = support_of(x_hat);
  Vector r(y.size());
  parallel_for(0, y.size(), [&](Index j) {
    double acc = 0.0;
    for (Index i : support) acc += x_hat[i] * mat.entry(i, j);
    r[j] = y[j] - acc;
  });
  return r;
}

Vector residual(const MeasurementVector& meas, const SparseSignal& x_hat, const SeededDesignMatrix& mat) {
  return residual(meas.y, x_hat, mat);
}

RecoveryReport recover(const MeasurementVector& meas, const SeededDesignMatrix& mat, const RecoveryConfig& cfg) {
  cfg.validate();
  if (cfg.alpha && *cfg.alpha != mat.alpha()) {
    throw std::invalid_argument("decoder alpha does not match the design matrix");
  }
  if (meas.size() != mat.cols()) throw std::invalid_argument("measurement length does not match M");
  for (Index j = 0; j < meas.size(); ++j) {
    if (!std::isfinite(meas.y[j])) throw std::invalid_argument("measurements must be finite");
  }
  const auto start = std::chrono::steady_clock::now();
  const Index n = mat.rows();
  const Index m = mat.cols();
  const double eps = cfg.epsilon;
  const double gap_eps = cfg.gap_eps();
  const Vector& y = meas.y;

  RecoveryReport report;
  report.x_hat = SparseSignal::Zero(n);
  std::vector<CoordState> state(static_cast<std::size_t>(n), CoordState::kZero);
  std::vector<char> survived(static_cast<std::size_t>(n), 0);

  // Iteration 1. Any |z_j| <= eps already decides the minimum test, so the
  // scan of a zero coordinate usually stops after a few dozen entries.
  parallel_for(0, n, [&](Index i) {
    thread_local std::vector<double> z;
    z.clear();
    for (Index j = 0; j < m; ++j) {
      const double v = y[j] / mat.entry(i, j);
      if (!std::isfinite(v)) continue;
      if (std::abs(v) <= eps) return;
      z.push_back(v);
    }
    if (z.empty()) throw std::invalid_argument("min_estimate: no finite ratio");
    survived[static_cast<std::size_t>(i)] = 1;
    if (z.size() < 2) {
      state[static_cast<std::size_t>(i)] = CoordState::kUndetermined;
      return;
    }
    const auto est = closest_pair_midpoint(z, gap_eps);
    if (!est) {
      state[static_cast<std::size_t>(i)] = CoordState::kUndetermined;
    } else {
      state[static_cast<std::size_t>(i)] = CoordState::kNonzero;
      report.x_hat[i] = *est;
    }
  });

  std::vector<Index> undetermined;
  for (Index i = 0; i < n; ++i) {
    if (survived[static_cast<std::size_t>(i)]) report.min_survivors.push_back(i);
    if (state[static_cast<std::size_t>(i)] == CoordState::kUndetermined) undetermined.push_back(i);
  }
  Vector r = residual(y, report.x_hat, mat);
  report.iterations.push_back({1, static_cast<Index>(undetermined.size()), r.norm()});
  report.iterations_run = 1;

  for (int t = 2; t <= cfg.max_iterations && !undetermined.empty(); ++t) {
    std::vector<std::optional<double>> result(undetermined.size());
    parallel_for(0, static_cast<Index>(undetermined.size()), [&](Index k) {
      const Index i = undetermined[static_cast<std::size_t>(k)];
      thread_local std::vector<double> z;
      z.clear();
      for (Index j = 0; j < m; ++j) {
        // An exactly cancelled residual carries no information about x_i.
        if (r[j] == 0.0) continue;
        const double v = r[j] / mat.entry(i, j);
        if (std::isfinite(v)) z.push_back(v);
      }
      if (z.size() < 2) return;
      result[static_cast<std::size_t>(k)] = closest_pair_midpoint(z, gap_eps);
    });

    std::vector<Index> still;
    for (std::size_t k = 0; k < undetermined.size(); ++k) {
      const Index i = undetermined[k];
      if (!result[k]) {
        still.push_back(i);
      } else if (std::abs(*result[k]) <= eps) {
        state[static_cast<std::size_t>(i)] = CoordState::kZero;
      } else {
        state[static_cast<std::size_t>(i)] = CoordState::kNonzero;
        report.x_hat[i] = *result[k];
      }
    }
    const bool changed = still.size() != undetermined.size();
    undetermined = std::move(still);
    if (changed) r = residual(y, report.x_hat, mat);
    report.iterations.push_back({t, static_cast<Index>(undetermined.size()), r.norm()});
    report.iterations_run = t;
    if (!changed) break;
  }

  report.undetermined = std::move(undetermined);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

KEstimate estimate_k(const Vector& y, double alpha) {
  if (y.size() < 2) throw std::invalid_argument("estimate_k needs at least two measurements");
  if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("estimate_k needs 0 < alpha < 1/2");
  double inv_sum = 0.0;
  for (Index j = 0; j < y.size(); ++j) {
    if (y[j] == 0.0) return {0.0, true};
    inv_sum += std::pow(std::abs(y[j]), -alpha);
  }
  const double pi = std::numbers::pi;
  const double g = std::tgamma(-alpha) * std::sin(pi * alpha / 2);
  const double lead = -(2.0 / pi) * g;
  const double var_term = -pi * std::tgamma(-2 * alpha) * std::sin(pi * alpha) / (g * g) - 1.0;
  const double m = static_cast<double>(y.size());
  return {lead / inv_sum * (m - var_term), false};
}

void write_report(std::ostream& os, const RecoveryReport& report, bool include_timing) {
  os << "# estimates\n";
  csv::write_row(os, {"i", "x_hat"});
  for (Index i : support_of(report.x_hat)) csv::write_row(os, {std::to_string(i), csv::fmt(report.x_hat[i])});
  os << "# iterations\n";
  csv::write_row(os, {"iteration", "undetermined", "residual_norm"});
  for (const auto& rec : report.iterations) {
    csv::write_row(os, {std::to_string(rec.iteration), std::to_string(rec.undetermined), csv::fmt(rec.residual_norm)});
  }
  if (include_timing) {
    os << "# timing\n";
    csv::write_row(os, {"wall_seconds", csv::fmt(report.wall_seconds)});
  }
}

}  // namespace l0rec
