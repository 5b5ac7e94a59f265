#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace l0rec {

/// Limit model of the decoder as alpha -> 0: every measurement is dominated by
/// exactly one of the still-unrecovered nonzero coordinates (a "hit"), and a
/// coordinate is recovered once it holds two or more hits.
struct IdealInstance {
  std::int64_t k = 1;
  std::int64_t m = 0;
  bool fresh_projections = false;
  std::uint64_t seed = 0;
};

struct IdealIteration {
  std::int64_t unrecovered_before;
  std::int64_t recovered;
  std::int64_t hits;  // always M while anything is unrecovered
};

struct IdealOutcome {
  std::int64_t recovered = 0;
  int iterations = 0;
  std::int64_t first_iteration_failures = 0;  // coordinates with < 2 hits after iteration 1
  std::vector<IdealIteration> trace;
};

/// `pick(j, n)` chooses which of the n unrecovered coordinates measurement j
/// now hits. Without fresh projections a measurement only re-picks after its
/// coordinate is recovered (its dominance order is kept); with fresh
/// projections every measurement re-picks each iteration.
using IdealPicker = std::function<std::int64_t(std::int64_t j, std::int64_t n)>;
IdealOutcome simulate_ideal_with(const IdealInstance& inst, const IdealPicker& pick);

/// Uniform picks from per-measurement Philox substreams of `inst.seed`.
IdealOutcome simulate_ideal(const IdealInstance& inst);

struct IdealSweepRow {
  std::int64_t k;
  std::int64_t m;
  double m_over_k;
  bool fresh;
  std::int64_t trials;
  double full_recovery_rate;
  double mean_recovered_fraction;
  double first_iteration_failure_rate;  // per coordinate
  double p_ideal;
  double ideal_total_m;
};

/// One row per (K, M/K) pair; M = round(ratio * K). Trial t uses derive_seed(seed, t).
std::vector<IdealSweepRow> ideal_sweep(const std::vector<std::int64_t>& ks, const std::vector<double>& m_over_k,
                                       double delta, std::int64_t trials, std::uint64_t seed, bool fresh);

void write_ideal_sweep(std::ostream& os, const std::vector<IdealSweepRow>& rows);

}  // namespace l0rec
