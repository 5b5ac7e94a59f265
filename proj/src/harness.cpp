#include "l0rec/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "l0rec/bounds.hpp"
#include "l0rec/csv.hpp"
#include "l0rec/decoder.hpp"
#include "l0rec/encoder.hpp"
#include "l0rec/omp.hpp"
#include "l0rec/parallel.hpp"
#include "l0rec/rng.hpp"

namespace l0rec {

SignalKind parse_signal_kind(const std::string& s) {
  if (s == "gaussian") return SignalKind::kGaussian;
  if (s == "sign") return SignalKind::kSign;
  throw std::invalid_argument("unknown signal kind '" + s + "' (expected gaussian or sign)");
}

const char* to_string(SignalKind k) { return k == SignalKind::kGaussian ? "gaussian" : "sign"; }

SparseSignal gen_signal(Index n, Index k, SignalKind kind, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("signal length must be positive");
  if (k < 0 || k > n) throw std::invalid_argument("need 0 <= K <= N");
  SparseSignal x = SparseSignal::Zero(n);
  CounterStream rng(seed, Stream::kSignal);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index t = 0; t < k; ++t) {
    const auto pick = t + static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(n - t)));
    std::swap(idx[static_cast<std::size_t>(t)], idx[static_cast<std::size_t>(pick)]);
  }
  for (Index t = 0; t < k; ++t) {
    double g = 0.0;
    while (g == 0.0) g = 5.0 * rng.next_normal();
    x[idx[static_cast<std::size_t>(t)]] = kind == SignalKind::kSign ? (g > 0 ? 1.0 : -1.0) : g;
  }
  return x;
}

MetricsRow metrics(const SparseSignal& x_true, const SparseSignal& x_hat_in, std::optional<Index> top_k) {
  if (x_true.size() != x_hat_in.size()) throw std::invalid_argument("metrics: length mismatch");
  SparseSignal x_hat = x_hat_in;
  if (top_k) {
    auto support = support_of(x_hat);
    if (static_cast<Index>(support.size()) > *top_k) {
      std::stable_sort(support.begin(), support.end(),
                       [&](Index a, Index b) { return std::abs(x_hat[a]) > std::abs(x_hat[b]); });
      for (std::size_t r = static_cast<std::size_t>(std::max<Index>(*top_k, 0)); r < support.size(); ++r) {
        x_hat[support[r]] = 0.0;
      }
    }
  }
  MetricsRow row;
  bool values_ok = true;
  double num = 0.0;
  double den = 0.0;
  for (Index i = 0; i < x_true.size(); ++i) {
    const bool t = x_true[i] != 0.0;
    const bool h = x_hat[i] != 0.0;
    if (t && h) ++row.tp;
    if (!t && h) ++row.fp;
    if (t && !h) ++row.fn;
    if (t && h && !(std::abs(x_hat[i] - x_true[i]) <= kExactTolerance * std::abs(x_true[i]))) values_ok = false;
    const double d = x_true[i] - x_hat[i];
    num += d * d;
    den += x_true[i] * x_true[i];
  }
  if (row.tp + row.fp > 0) row.precision = static_cast<double>(row.tp) / static_cast<double>(row.tp + row.fp);
  if (row.tp + row.fn > 0) row.recall = static_cast<double>(row.tp) / static_cast<double>(row.tp + row.fn);
  if (den > 0.0) {
    row.error = std::sqrt(num / den);
  } else {
    row.error = std::nan("");
    row.error_defined = false;
  }
  row.exact = row.fp == 0 && row.fn == 0 && values_ok;
  return row;
}

Index ExperimentSpec::measurements() const {
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
  const auto m = static_cast<Index>(std::llround(bounds::m0(n, k, delta) / zeta));
  if (m < 2) throw std::invalid_argument("M = round(M0/zeta) = " + std::to_string(m) + " is below 2");
  return m;
}

void ExperimentSpec::validate() const {
  if (n < 2 || k < 1 || k >= n) throw std::invalid_argument("need N >= 2 and 1 <= K < N");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("alpha must lie in (0, 2]");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (decoder.kind == DecoderSpec::Kind::kMinGap && decoder.iterations < 1) {
    throw std::invalid_argument("min_gap needs at least one iteration");
  }
  if (noise.kind == NoiseSpec::Kind::kAdditive && !(noise.sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (noise.kind == NoiseSpec::Kind::kMultiplicative && noise.rho_pattern.empty()) {
    throw std::invalid_argument("multiplicative noise needs a rho pattern");
  }
  const Index m = measurements();
  if (decoder.kind == DecoderSpec::Kind::kOmp && k > m) throw std::invalid_argument("OMP needs K <= M");
}

double quantile(std::vector<double> values, double q) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

SummaryRow summarize(const std::string& name, const std::vector<double>& v) {
  double sum = 0.0;
  std::size_t cnt = 0;
  for (double x : v) {
    if (std::isfinite(x)) {
      sum += x;
      ++cnt;
    }
  }
  return {name, quantile(v, 0.5), cnt ? sum / static_cast<double>(cnt) : std::nan(""), quantile(v, 0.25),
          quantile(v, 0.75)};
}

std::string noise_label(const NoiseSpec& n) {
  switch (n.kind) {
    case NoiseSpec::Kind::kNone: return "none";
    case NoiseSpec::Kind::kAdditive:
      return "additive(sigma=" + csv::fmt(n.sigma) + (n.scale_by_n ? ";scaled_by_n" : "") + ")";
    case NoiseSpec::Kind::kMultiplicative: return "multiplicative(" + n.rho_pattern + ")";
  }
  return "none";
}

TrialRow run_trial(const ExperimentSpec& spec, std::int64_t t, Index m) {
  const std::uint64_t ts = derive_seed(spec.seed, static_cast<std::uint64_t>(t));
  const SparseSignal x = gen_signal(spec.n, spec.k, spec.signal, ts);
  const bool omp = spec.decoder.kind == DecoderSpec::Kind::kOmp;
  // Both decoders see matrices built from the same (u, w) draws.
  const SeededDesignMatrix mat(ts, spec.n, m, StableParams{omp ? 2.0 : spec.alpha});
  MeasurementVector meas = measure(x, mat);
  if (spec.noise.kind == NoiseSpec::Kind::kAdditive) {
    add_noise(meas, spec.noise.sigma, ts, spec.noise.scale_by_n);
  } else if (spec.noise.kind == NoiseSpec::Kind::kMultiplicative) {
    apply_multiplicative(meas, rho_pattern(spec.noise.rho_pattern, m));
  }

  TrialRow row{t, m, {}, std::nan(""), std::nan(""), 0};
  SparseSignal x_hat;
  double seconds = 0.0;
  if (omp) {
    const auto start = std::chrono::steady_clock::now();
    const OmpResult res = omp_decode(meas, mat, OmpConfig{spec.k});
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    x_hat = res.x_hat;
    row.iterations_run = static_cast<int>(res.selected.size());
  } else {
    RecoveryConfig cfg;
    cfg.epsilon = spec.epsilon;
    cfg.gap_epsilon = spec.gap_epsilon;
    cfg.max_iterations = spec.decoder.iterations;
    const RecoveryReport rep = recover(meas, mat, cfg);
    seconds = rep.wall_seconds;
    x_hat = rep.x_hat;
    row.iterations_run = rep.iterations_run;
    Index hit = 0;
    for (Index i : rep.min_survivors) {
      if (x[i] != 0.0) ++hit;
    }
    const auto surv = static_cast<double>(rep.min_survivors.size());
    row.min_precision = surv > 0 ? static_cast<double>(hit) / surv : 1.0;
    row.min_recall = static_cast<double>(hit) / static_cast<double>(spec.k);
  }
  row.final_metrics = metrics(x, x_hat, spec.top_k);
  row.final_metrics.wall_seconds = seconds;
  row.final_metrics.trial_seed = ts;
  return row;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const Index m = spec.measurements();
  ExperimentResult result;
  result.spec = spec;
  result.trials.resize(static_cast<std::size_t>(spec.trials));
  parallel_for(0, spec.trials, [&](Index t) { result.trials[static_cast<std::size_t>(t)] = run_trial(spec, t, m); });

  std::vector<double> precision, recall, error, exact, min_p, min_r, iters, secs;
  for (const auto& r : result.trials) {
    precision.push_back(r.final_metrics.precision);
    recall.push_back(r.final_metrics.recall);
    error.push_back(r.final_metrics.error);
    exact.push_back(r.final_metrics.exact ? 1.0 : 0.0);
    min_p.push_back(r.min_precision);
    min_r.push_back(r.min_recall);
    iters.push_back(r.iterations_run);
    secs.push_back(r.final_metrics.wall_seconds);
  }
  result.summary = {summarize("precision", precision), summarize("recall", recall),
                    summarize("error", error),         summarize("exact", exact),
                    summarize("min_precision", min_p), summarize("min_recall", min_r),
                    summarize("iterations", iters)};
  if (spec.timing) result.summary.push_back(summarize("wall_seconds", secs));
  return result;
}

void write_experiment(std::ostream& os, const ExperimentResult& result) {
  const auto& s = result.spec;
  const bool omp = s.decoder.kind == DecoderSpec::Kind::kOmp;
  os << "# spec\n";
  csv::write_row(os, {"key", "value"});
  csv::write_row(os, {"n", std::to_string(s.n)});
  csv::write_row(os, {"k", std::to_string(s.k)});
  csv::write_row(os, {"zeta", csv::fmt(s.zeta)});
  csv::write_row(os, {"m", std::to_string(s.measurements())});
  csv::write_row(os, {"delta", csv::fmt(s.delta)});
  csv::write_row(os, {"alpha", csv::fmt(omp ? 2.0 : s.alpha)});
  csv::write_row(os, {"epsilon", csv::fmt(s.epsilon)});
  csv::write_row(os, {"gap_epsilon", csv::fmt(s.gap_epsilon.value_or(s.epsilon))});
  csv::write_row(os, {"signal", to_string(s.signal)});
  csv::write_row(os, {"noise", noise_label(s.noise)});
  csv::write_row(os, {"decoder", omp ? "omp" : "min_gap(" + std::to_string(s.decoder.iterations) + ")"});
  csv::write_row(os, {"trials", std::to_string(s.trials)});
  csv::write_row(os, {"seed", std::to_string(s.seed)});
  os << "# trials\n";
  std::vector<std::string> header{"trial", "trial_seed", "m",     "tp",          "fp",         "fn",        "precision",
                                  "recall", "error",     "exact", "min_precision", "min_recall", "iterations"};
  if (s.timing) header.push_back("wall_seconds");
  csv::write_row(os, header);
  for (const auto& r : result.trials) {
    const auto& mr = r.final_metrics;
    std::vector<std::string> row{std::to_string(r.trial), std::to_string(mr.trial_seed), std::to_string(r.m),
                                 std::to_string(mr.tp),   std::to_string(mr.fp),         std::to_string(mr.fn),
                                 csv::fmt(mr.precision),  csv::fmt(mr.recall),           csv::fmt(mr.error),
                                 mr.exact ? "1" : "0",    csv::fmt(r.min_precision),     csv::fmt(r.min_recall),
                                 std::to_string(r.iterations_run)};
    if (s.timing) row.push_back(csv::fmt(mr.wall_seconds));
    csv::write_row(os, row);
  }
  os << "# summary\n";
  csv::write_row(os, {"metric", "median", "mean", "q25", "q75"});
  for (const auto& r : result.summary) {
    csv::write_row(os, {r.metric, csv::fmt(r.median), csv::fmt(r.mean), csv::fmt(r.q25), csv::fmt(r.q75)});
  }
}

ImageDemoResult image_demo(const GrayImage& input, double zeta, double delta, double alpha, std::uint64_t seed,
                           double epsilon, int iterations) {
  const auto n = static_cast<Index>(input.size());
  if (n < 2) throw std::invalid_argument("image needs at least two pixels");
  if (n > static_cast<Index>(kMaxImagePixels)) throw std::invalid_argument("image too large");
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
  SparseSignal x(n);
  for (Index i = 0; i < n; ++i) x[i] = input.pixels[static_cast<std::size_t>(i)];
  const auto k = static_cast<Index>(support_of(x).size());
  if (k >= n) throw std::invalid_argument("image has no zero pixels; nothing sparse to recover");
  // An all-black image still gets two measurements.
  const Index m = std::max<Index>(2, static_cast<Index>(std::llround(bounds::m0(n, k, delta) / zeta)));
  const SeededDesignMatrix mat(seed, n, m, StableParams{alpha});
  RecoveryConfig cfg;
  cfg.epsilon = epsilon;
  cfg.max_iterations = iterations;
  const RecoveryReport rep = recover(measure(x, mat), mat, cfg);

  ImageDemoResult out{input, metrics(x, rep.x_hat), k, m, true};
  out.metrics.wall_seconds = rep.wall_seconds;
  out.metrics.trial_seed = seed;
  for (Index i = 0; i < n; ++i) {
    const double v = std::clamp(std::round(rep.x_hat[i]), 0.0, 255.0);
    out.output.pixels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
  }
  out.identical = out.output.pixels == input.pixels;
  return out;
}

std::vector<double> Range::values() const {
  if (count < 0) throw std::invalid_argument("range count must be >= 0");
  if (!std::isfinite(start) || !std::isfinite(stop)) throw std::invalid_argument("range bounds must be finite");
  if (log_spaced && !(start > 0.0 && stop > 0.0)) throw std::invalid_argument("log range needs positive bounds");
  std::vector<double> v;
  for (std::int64_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    v.push_back(log_spaced ? std::exp(std::log(start) + f * (std::log(stop) - std::log(start)))
                           : start + f * (stop - start));
  }
  return v;
}

void sweep_f(std::ostream& os, const Range& t, double alpha, std::int64_t mc_samples, std::uint64_t seed) {
  const auto ts = t.values();
  csv::write_row(os, {"t", "alpha", "f_lower", "f_upper", "f_mc", "f_mc_se"});
  std::vector<bounds::MonteCarloEstimate> mc(ts.size(), {std::nan(""), std::nan("")});
  if (mc_samples > 0 && !ts.empty()) mc = bounds::f_monte_carlo_grid(ts, alpha, mc_samples, seed);
  const bool upper_ok = alpha > 0.0 && alpha < 1.0 / 3.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    csv::write_row(os, {csv::fmt(ts[i]), csv::fmt(alpha), csv::fmt(bounds::f_lower(ts[i])),
                        csv::fmt(upper_ok ? bounds::f_upper(ts[i], alpha) : std::nan("")), csv::fmt(mc[i].estimate),
                        csv::fmt(mc[i].std_error)});
  }
}

void sweep_c_alpha(std::ostream& os, const Range& alpha) {
  const auto as = alpha.values();
  csv::write_row(os, {"alpha", "mu1", "mu2", "c_alpha"});
  for (double a : as) {
    csv::write_row(os, {csv::fmt(a), csv::fmt(bounds::mu1(a)), csv::fmt(bounds::mu2(a)), csv::fmt(bounds::c_alpha(a))});
  }
}

void sweep_eta(std::ostream& os, const Range& k, double alpha, double c0) {
  const auto ks = k.values();
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const double gamma = (1.0 - alpha) / alpha;
  csv::write_row(os, {"k", "alpha", "gamma", "c0", "eta", "eta_upper"});
  for (double kv : ks) {
    const double kk = std::round(kv);
    csv::write_row(os, {csv::fmt(kk), csv::fmt(alpha), csv::fmt(gamma), csv::fmt(c0),
                        csv::fmt(bounds::eta(kk, gamma, c0)), csv::fmt(bounds::eta_upper(kk, gamma, c0))});
  }
}

void sweep_g(std::ostream& os, const Range& m_over_k_star, double k_star, double alpha) {
  const auto rs = m_over_k_star.values();
  csv::write_row(os, {"m_over_k_star", "k_star", "alpha", "m", "g"});
  for (double r : rs) {
    const auto m = static_cast<std::int64_t>(std::llround(r * k_star));
    csv::write_row(os, {csv::fmt(r), csv::fmt(k_star), csv::fmt(alpha), std::to_string(m),
                        csv::fmt(bounds::gap_error_bound(m, k_star, alpha).value)});
  }
}

void sweep_sample_size(std::ostream& os, const Range& k, Index n, double delta, double epsilon, double alpha) {
  const auto ks = k.values();
  csv::write_row(os, {"k", "n", "delta", "epsilon", "alpha", "psi", "m0", "required_m", "fp_bound_at_m0",
                      "ideal_required_m", "ideal_total_m"});
  for (double kv : ks) {
    const auto kk = static_cast<std::int64_t>(std::llround(kv));
    // Sign signal: theta^alpha = K.
    const double p = bounds::psi_from_pow(epsilon, static_cast<double>(kk), alpha);
    const double m0v = bounds::m0(n, kk, delta);
    csv::write_row(os, {std::to_string(kk), std::to_string(n), csv::fmt(delta), csv::fmt(epsilon), csv::fmt(alpha),
                        csv::fmt(p), csv::fmt(m0v), csv::fmt(bounds::required_m(n, kk, delta, p).value),
                        csv::fmt(bounds::fp_bound(static_cast<std::int64_t>(std::llround(m0v)), p).value),
                        std::to_string(bounds::ideal_required_m(kk, delta)),
                        csv::fmt(bounds::ideal_total_m(kk, delta))});
  }
}

}  // namespace l0rec
