#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "l0rec/pgm.hpp"
#include "l0rec/stable.hpp"
#include "l0rec/types.hpp"

namespace l0rec {

enum class SignalKind { kGaussian, kSign };
SignalKind parse_signal_kind(const std::string& s);
const char* to_string(SignalKind k);

/// K distinct uniformly chosen coordinates; values ~ N(0, 25), or the signs
/// of those draws for kSign.
SparseSignal gen_signal(Index n, Index k, SignalKind kind, std::uint64_t seed);

/// Relative tolerance under which a recovered value counts as exact.
inline constexpr double kExactTolerance = 1e-8;

struct MetricsRow {
  Index tp = 0;
  Index fp = 0;
  Index fn = 0;
  double precision = 1.0;  // 0/0 (nothing reported) counts as 1
  double recall = 1.0;     // 0/0 (nothing to find) counts as 1
  double error = 0.0;      // sqrt(sum (x - x_hat)^2 / sum x^2)
  bool error_defined = true;
  bool exact = false;      // same support and every value within kExactTolerance relative
  double wall_seconds = 0.0;
  std::uint64_t trial_seed = 0;
};

/// Compares supports (optionally after keeping only the top_k entries of
/// x_hat by magnitude) and evaluates the relative L2 error.
MetricsRow metrics(const SparseSignal& x_true, const SparseSignal& x_hat, std::optional<Index> top_k = std::nullopt);

struct NoiseSpec {
  enum class Kind { kNone, kAdditive, kMultiplicative };
  Kind kind = Kind::kNone;
  double sigma = 0.0;
  bool scale_by_n = false;
  std::string rho_pattern;  // e.g. "alternating:5"
};

struct DecoderSpec {
  enum class Kind { kMinGap, kOmp };
  Kind kind = Kind::kMinGap;
  int iterations = 1;  // min_gap only; OMP runs K steps
};

struct ExperimentSpec {
  Index n = 10000;
  Index k = 30;
  double zeta = 1.0;
  double delta = 0.01;
  double alpha = kDefaultAlpha;
  double epsilon = 1e-5;
  std::optional<double> gap_epsilon;
  SignalKind signal = SignalKind::kSign;
  NoiseSpec noise;
  std::int64_t trials = 1;
  std::uint64_t seed = 1;
  DecoderSpec decoder;
  std::optional<Index> top_k;
  bool timing = false;  // wall time in the CSV makes it non-reproducible

  /// M = round(m0(N, K, delta) / zeta); throws unless M >= 2.
  Index measurements() const;
  void validate() const;
};

struct TrialRow {
  std::int64_t trial;
  Index m;
  MetricsRow final_metrics;
  double min_precision;  // minimum-estimator stage (min+gap only)
  double min_recall;
  int iterations_run;
};

struct SummaryRow {
  std::string metric;
  double median;
  double mean;
  double q25;
  double q75;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<TrialRow> trials;
  std::vector<SummaryRow> summary;
};

/// Trial t draws everything from derive_seed(spec.seed, t); results do not
/// depend on thread count.
ExperimentResult run_experiment(const ExperimentSpec& spec);
void write_experiment(std::ostream& os, const ExperimentResult& result);

/// Linear-interpolation quantile of the finite values; NaN when none.
double quantile(std::vector<double> values, double q);

struct ImageDemoResult {
  GrayImage output;
  MetricsRow metrics;
  Index k;
  Index m;
  bool identical;  // output bytes equal input bytes
};

ImageDemoResult image_demo(const GrayImage& input, double zeta, double delta, double alpha, std::uint64_t seed,
                           double epsilon = 1e-5, int iterations = 3);

// Bound tables. A Range with count 0 yields a header-only table.
struct Range {
  double start = 0.0;
  double stop = 0.0;
  std::int64_t count = 0;
  bool log_spaced = false;

  std::vector<double> values() const;
};

void sweep_f(std::ostream& os, const Range& t, double alpha, std::int64_t mc_samples, std::uint64_t seed);
void sweep_c_alpha(std::ostream& os, const Range& alpha);
void sweep_eta(std::ostream& os, const Range& k, double alpha, double c0);
void sweep_g(std::ostream& os, const Range& m_over_k_star, double k_star, double alpha);
void sweep_sample_size(std::ostream& os, const Range& k, Index n, double delta, double epsilon, double alpha);

}  // namespace l0rec
