#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "l0rec/bounds.hpp"
#include "l0rec/csv.hpp"
#include "l0rec/decoder.hpp"
#include "l0rec/encoder.hpp"
#include "l0rec/harness.hpp"
#include "l0rec/ideal.hpp"
#include "l0rec/omp.hpp"
#include "l0rec/pgm.hpp"

using namespace l0rec;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes to the named file, or stdout for "" / "-".
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  fn(out);
  if (!out) throw IoError("write to '" + path + "' failed");
}

MeasurementVector load_measurements(const std::string& path) {
  if (path.empty() || path == "-") return read_measurements(std::cin);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_measurements(in);
}

// Signal file: header `i,x` then one row per nonzero coordinate.
SparseSignal load_signal(const std::string& path, Index n) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  SparseSignal x = SparseSignal::Zero(n);
  std::string line;
  if (!std::getline(in, line) || line != "i,x") throw std::runtime_error("signal file must start with 'i,x'");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 2) throw std::runtime_error("bad signal row '" + line + "'");
    const auto i = csv::parse_int(f[0]);
    if (i < 0 || i >= n) throw std::runtime_error("signal index " + f[0] + " out of range");
    x[i] = csv::parse_double(f[1]);
  }
  return x;
}

void write_signal(std::ostream& os, const SparseSignal& x) {
  csv::write_row(os, {"i", "x"});
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) csv::write_row(os, {std::to_string(i), csv::fmt(x[i])});
  }
}

void add_range(CLI::App* app, Range& r, const std::string& what) {
  app->add_option("--start", r.start, "first " + what)->required();
  app->add_option("--stop", r.stop, "last " + what)->required();
  app->add_option("--count", r.count, "number of grid points (0 gives a header-only table)")->required();
  app->add_flag("--log", r.log_spaced, "log-spaced grid");
}

NoiseSpec noise_from(double sigma, bool scale_n, const std::string& rho) {
  NoiseSpec ns;
  if (!rho.empty() && sigma > 0.0) throw std::invalid_argument("pick either --sigma or --rho, not both");
  if (!rho.empty()) {
    ns.kind = NoiseSpec::Kind::kMultiplicative;
    ns.rho_pattern = rho;
  } else if (sigma > 0.0) {
    ns.kind = NoiseSpec::Kind::kAdditive;
    ns.sigma = sigma;
    ns.scale_by_n = scale_n;
  } else if (sigma < 0.0) {
    throw std::invalid_argument("--sigma must be >= 0");
  }
  return ns;
}

int fail(const std::string& kind, const std::string& msg) {
  std::cerr << "error," << kind << "," << csv::quote(msg) << "\n";
  return kind == "usage" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l0rec: sparse recovery with very heavy-tailed stable projections"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "l0rec 1.0");

  // encode
  auto* enc = app.add_subcommand("encode", "measure a sparse signal; writes a measurement CSV");
  Index enc_n = 10000, enc_k = 30;
  std::optional<Index> enc_m;
  double enc_zeta = 1.0, enc_delta = 0.01, enc_alpha = kDefaultAlpha, enc_sigma = 0.0;
  bool enc_scale_n = false;
  std::string enc_rho, enc_signal = "sign", enc_signal_file, enc_signal_out, enc_out;
  std::uint64_t enc_seed = 1, enc_noise_seed = 2;
  enc->add_option("--n", enc_n, "signal length N")->capture_default_str();
  enc->add_option("--k", enc_k, "nonzeros K (generated signal)")->capture_default_str();
  enc->add_option("--m", enc_m, "measurement count M (default round(M0/zeta))");
  enc->add_option("--zeta", enc_zeta, "M = M0/zeta")->capture_default_str();
  enc->add_option("--delta", enc_delta, "confidence parameter in M0")->capture_default_str();
  enc->add_option("--alpha", enc_alpha, "stability index")->capture_default_str();
  enc->add_option("--signal", enc_signal, "gaussian | sign")->capture_default_str();
  enc->add_option("--signal-file", enc_signal_file, "read x from an `i,x` CSV instead of generating it");
  enc->add_option("--signal-out", enc_signal_out, "also write the signal as `i,x` CSV");
  enc->add_option("--seed", enc_seed, "matrix and signal seed")->capture_default_str();
  enc->add_option("--sigma", enc_sigma, "additive Gaussian noise standard deviation")->capture_default_str();
  enc->add_flag("--noise-scale-n", enc_scale_n, "use standard deviation sigma*sqrt(N)");
  enc->add_option("--noise-seed", enc_noise_seed, "noise seed")->capture_default_str();
  enc->add_option("--rho", enc_rho, "multiplicative pattern, const:r or alternating:r");
  enc->add_option("-o,--out", enc_out, "output file (default stdout)");

  // decode
  auto* dec = app.add_subcommand("decode", "recover x from a measurement CSV");
  std::string dec_in, dec_out, dec_decoder = "min_gap";
  double dec_eps = 1e-5;
  std::optional<double> dec_gap_eps;
  int dec_iters = 3;
  Index dec_k = 0;
  bool dec_timing = false;
  dec->add_option("-i,--in", dec_in, "measurement CSV (default stdin)");
  dec->add_option("--decoder", dec_decoder, "min_gap | omp")->capture_default_str();
  dec->add_option("--epsilon", dec_eps, "zero-detection threshold")->capture_default_str();
  dec->add_option("--gap-epsilon", dec_gap_eps, "gap threshold (default epsilon)");
  dec->add_option("--iterations", dec_iters, "min_gap iterations")->capture_default_str();
  dec->add_option("--k", dec_k, "OMP steps");
  dec->add_flag("--timing", dec_timing, "append wall time");
  dec->add_option("-o,--out", dec_out, "output file (default stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "end-to-end trials; writes spec, per-trial and summary tables");
  ExperimentSpec spec;
  std::string sim_signal = "sign", sim_decoder = "min_gap", sim_rho, sim_out;
  double sim_sigma = 0.0;
  bool sim_scale_n = false;
  std::optional<Index> sim_top_k;
  sim->add_option("--n", spec.n, "signal length N")->capture_default_str();
  sim->add_option("--k", spec.k, "nonzeros K")->capture_default_str();
  sim->add_option("--zeta", spec.zeta, "M = round(M0/zeta)")->capture_default_str();
  sim->add_option("--delta", spec.delta, "confidence parameter in M0")->capture_default_str();
  sim->add_option("--alpha", spec.alpha, "stability index (OMP always uses 2)")->capture_default_str();
  sim->add_option("--epsilon", spec.epsilon, "zero-detection threshold")->capture_default_str();
  sim->add_option("--gap-epsilon", spec.gap_epsilon, "gap threshold (default epsilon)");
  sim->add_option("--signal", sim_signal, "gaussian | sign")->capture_default_str();
  sim->add_option("--sigma", sim_sigma, "additive noise standard deviation")->capture_default_str();
  sim->add_flag("--noise-scale-n", sim_scale_n, "use standard deviation sigma*sqrt(N)");
  sim->add_option("--rho", sim_rho, "multiplicative pattern, const:r or alternating:r");
  sim->add_option("--trials", spec.trials, "number of trials")->capture_default_str();
  sim->add_option("--seed", spec.seed, "master seed")->capture_default_str();
  sim->add_option("--decoder", sim_decoder, "min_gap | omp")->capture_default_str();
  sim->add_option("--iterations", spec.decoder.iterations, "min_gap iterations")->capture_default_str();
  sim->add_option("--top-k", sim_top_k, "score only the top-k entries of x_hat");
  sim->add_flag("--timing", spec.timing, "add wall time columns (output no longer reproducible)");
  sim->add_option("-o,--out", sim_out, "output file (default stdout)");

  // bounds
  auto* bnd = app.add_subcommand("bounds", "tabulate analytic bounds");
  bnd->require_subcommand(1);
  std::string bnd_out;
  bnd->add_option("-o,--out", bnd_out, "output file (default stdout)");

  auto* b_f = bnd->add_subcommand("f", "columns: t,alpha,f_lower,f_upper,f_mc,f_mc_se");
  Range f_range;
  double f_alpha = kDefaultAlpha;
  std::int64_t f_mc = 0;
  std::uint64_t f_seed = 1;
  add_range(b_f, f_range, "t");
  b_f->add_option("--alpha", f_alpha, "stability index")->capture_default_str();
  b_f->add_option("--mc-samples", f_mc, "Monte Carlo draws per point (0 skips)")->capture_default_str();
  b_f->add_option("--seed", f_seed, "Monte Carlo seed")->capture_default_str();

  auto* b_c = bnd->add_subcommand("c-alpha", "columns: alpha,mu1,mu2,c_alpha");
  Range c_range;
  add_range(b_c, c_range, "alpha");

  auto* b_eta = bnd->add_subcommand("eta", "columns: k,alpha,gamma,c0,eta,eta_upper");
  Range eta_range;
  double eta_alpha = kDefaultAlpha, eta_c0 = 2.0;
  add_range(b_eta, eta_range, "k");
  b_eta->add_option("--alpha", eta_alpha, "stability index")->capture_default_str();
  b_eta->add_option("--c0", eta_c0, "constant c0")->capture_default_str();

  auto* b_g = bnd->add_subcommand("g", "columns: m_over_k_star,k_star,alpha,m,g");
  Range g_range;
  double g_kstar = 100.0, g_alpha = kDefaultAlpha;
  add_range(b_g, g_range, "M/K*");
  b_g->add_option("--k-star", g_kstar, "effective sparsity K*")->capture_default_str();
  b_g->add_option("--alpha", g_alpha, "stability index")->capture_default_str();

  auto* b_ss = bnd->add_subcommand(
      "sample-size",
      "columns: k,n,delta,epsilon,alpha,psi,m0,required_m,fp_bound_at_m0,ideal_required_m,ideal_total_m");
  Range ss_range;
  Index ss_n = 10000;
  double ss_delta = 0.01, ss_eps = 1e-5, ss_alpha = kDefaultAlpha;
  add_range(b_ss, ss_range, "K");
  b_ss->add_option("--n", ss_n, "signal length N")->capture_default_str();
  b_ss->add_option("--delta", ss_delta, "confidence parameter")->capture_default_str();
  b_ss->add_option("--epsilon", ss_eps, "zero-detection threshold")->capture_default_str();
  b_ss->add_option("--alpha", ss_alpha, "stability index")->capture_default_str();

  // ideal
  auto* idl = app.add_subcommand("ideal", "simulate the two-hit limit model");
  std::vector<std::int64_t> idl_k{10, 100};
  std::vector<double> idl_ratio{4.8};
  std::int64_t idl_trials = 1000;
  std::uint64_t idl_seed = 1;
  double idl_delta = 0.01;
  bool idl_fresh = false;
  std::string idl_out;
  idl->add_option("--k", idl_k, "nonzero counts")->delimiter(',')->capture_default_str();
  idl->add_option("--m-over-k", idl_ratio, "M/K ratios")->delimiter(',')->capture_default_str();
  idl->add_option("--trials", idl_trials, "trials per cell")->capture_default_str();
  idl->add_option("--seed", idl_seed, "master seed")->capture_default_str();
  idl->add_option("--delta", idl_delta, "confidence for the ideal_total_m column")->capture_default_str();
  idl->add_flag("--fresh", idl_fresh, "new projections every iteration");
  idl->add_option("-o,--out", idl_out, "output file (default stdout)");

  // image
  auto* img = app.add_subcommand("image", "measure and reconstruct a sparse grayscale image");
  std::string img_in, img_synth, img_out, img_metrics;
  double img_zeta = 1.0, img_delta = 0.01, img_alpha = kDefaultAlpha, img_eps = 1e-5;
  std::uint64_t img_seed = 1;
  int img_iters = 3;
  auto* img_in_opt = img->add_option("-i,--in", img_in, "input PGM (P5)");
  img->add_option("--synthetic", img_synth, "generate WIDTHxHEIGHT:K instead of reading a file")
      ->excludes(img_in_opt);
  img->add_option("--zeta", img_zeta, "M = M0/zeta")->capture_default_str();
  img->add_option("--delta", img_delta, "confidence parameter")->capture_default_str();
  img->add_option("--alpha", img_alpha, "stability index")->capture_default_str();
  img->add_option("--epsilon", img_eps, "zero-detection threshold")->capture_default_str();
  img->add_option("--iterations", img_iters, "min_gap iterations")->capture_default_str();
  img->add_option("--seed", img_seed, "matrix (and synthetic image) seed")->capture_default_str();
  img->add_option("-o,--out", img_out, "reconstructed PGM")->required();
  img->add_option("--metrics", img_metrics, "metrics CSV (default stdout)");

  // estimate-k
  auto* est = app.add_subcommand("estimate-k", "estimate the alpha-norm power sum from measurements");
  std::string est_in;
  est->add_option("-i,--in", est_in, "measurement CSV (default stdin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*enc) {
      const Index m = enc_m ? *enc_m
                            : static_cast<Index>(std::llround(bounds::m0(enc_n, enc_k, enc_delta) / enc_zeta));
      if (m < 1) throw std::invalid_argument("measurement count must be positive");
      const SparseSignal x = enc_signal_file.empty() ? gen_signal(enc_n, enc_k, parse_signal_kind(enc_signal), enc_seed)
                                                     : load_signal(enc_signal_file, enc_n);
      const SeededDesignMatrix mat(enc_seed, enc_n, m, StableParams{enc_alpha});
      MeasurementVector meas = measure(x, mat);
      const NoiseSpec ns = noise_from(enc_sigma, enc_scale_n, enc_rho);
      if (ns.kind == NoiseSpec::Kind::kAdditive) add_noise(meas, ns.sigma, enc_noise_seed, ns.scale_by_n);
      if (ns.kind == NoiseSpec::Kind::kMultiplicative) apply_multiplicative(meas, rho_pattern(ns.rho_pattern, m));
      if (!enc_signal_out.empty()) emit(enc_signal_out, [&](std::ostream& os) { write_signal(os, x); });
      emit(enc_out, [&](std::ostream& os) { write_measurements(os, meas); });
    } else if (*dec) {
      const MeasurementVector meas = load_measurements(dec_in);
      const SeededDesignMatrix mat = meas.matrix.regenerate();
      if (dec_decoder == "min_gap") {
        RecoveryConfig cfg;
        cfg.epsilon = dec_eps;
        cfg.gap_epsilon = dec_gap_eps;
        cfg.max_iterations = dec_iters;
        const RecoveryReport rep = recover(meas, mat, cfg);
        emit(dec_out, [&](std::ostream& os) { write_report(os, rep, dec_timing); });
      } else if (dec_decoder == "omp") {
        if (dec_k < 1) throw std::invalid_argument("OMP needs --k >= 1");
        const OmpResult res = omp_decode(meas, mat, OmpConfig{dec_k});
        emit(dec_out, [&](std::ostream& os) {
          os << "# estimates\n";
          write_signal(os, res.x_hat);
          os << "# steps\n";
          csv::write_row(os, {"step", "selected", "residual_norm"});
          for (std::size_t s = 0; s < res.selected.size(); ++s) {
            csv::write_row(os, {std::to_string(s + 1), std::to_string(res.selected[s]), csv::fmt(res.residual_norms[s])});
          }
        });
      } else {
        throw std::invalid_argument("unknown decoder '" + dec_decoder + "' (expected min_gap or omp)");
      }
    } else if (*sim) {
      spec.signal = parse_signal_kind(sim_signal);
      spec.noise = noise_from(sim_sigma, sim_scale_n, sim_rho);
      spec.top_k = sim_top_k;
      if (sim_decoder == "omp") {
        spec.decoder.kind = DecoderSpec::Kind::kOmp;
      } else if (sim_decoder != "min_gap") {
        throw std::invalid_argument("unknown decoder '" + sim_decoder + "' (expected min_gap or omp)");
      }
      const ExperimentResult res = run_experiment(spec);
      emit(sim_out, [&](std::ostream& os) { write_experiment(os, res); });
    } else if (*bnd) {
      emit(bnd_out, [&](std::ostream& os) {
        if (*b_f) sweep_f(os, f_range, f_alpha, f_mc, f_seed);
        if (*b_c) sweep_c_alpha(os, c_range);
        if (*b_eta) sweep_eta(os, eta_range, eta_alpha, eta_c0);
        if (*b_g) sweep_g(os, g_range, g_kstar, g_alpha);
        if (*b_ss) sweep_sample_size(os, ss_range, ss_n, ss_delta, ss_eps, ss_alpha);
      });
    } else if (*idl) {
      const auto rows = ideal_sweep(idl_k, idl_ratio, idl_delta, idl_trials, idl_seed, idl_fresh);
      emit(idl_out, [&](std::ostream& os) { write_ideal_sweep(os, rows); });
    } else if (*img) {
      GrayImage input;
      if (!img_synth.empty()) {
        int w = 0, h = 0, k = 0;
        char x = 0, colon = 0;
        std::istringstream ss(img_synth);
        if (!(ss >> w >> x >> h >> colon >> k) || x != 'x' || colon != ':' || !ss.eof()) {
          throw std::invalid_argument("--synthetic expects WIDTHxHEIGHT:K, got '" + img_synth + "'");
        }
        input = synthetic_sparse_image(w, h, k, img_seed);
      } else if (!img_in.empty()) {
        input = read_pgm_file(img_in);
      } else {
        throw std::invalid_argument("need --in or --synthetic");
      }
      const ImageDemoResult res = image_demo(input, img_zeta, img_delta, img_alpha, img_seed, img_eps, img_iters);
      emit(img_out, [&](std::ostream& os) { write_pgm(os, res.output); });
      emit(img_metrics, [&](std::ostream& os) {
        const auto& mr = res.metrics;
        csv::write_row(os, {"n", "k", "m", "tp", "fp", "fn", "precision", "recall", "error", "error_defined",
                            "identical"});
        csv::write_row(os, {std::to_string(input.size()), std::to_string(res.k), std::to_string(res.m),
                            std::to_string(mr.tp), std::to_string(mr.fp), std::to_string(mr.fn),
                            csv::fmt(mr.precision), csv::fmt(mr.recall), csv::fmt(mr.error),
                            mr.error_defined ? "1" : "0", res.identical ? "1" : "0"});
      });
    } else if (*est) {
      const MeasurementVector meas = load_measurements(est_in);
      const KEstimate e = estimate_k(meas.y, meas.matrix.alpha);
      csv::write_row(std::cout, {"alpha", "m", "k_estimate", "degenerate"});
      csv::write_row(std::cout, {csv::fmt(meas.matrix.alpha), std::to_string(meas.size()), csv::fmt(e.value),
                                 e.degenerate ? "1" : "0"});
    }
  } catch (const IoError& e) {
    return fail("io", e.what());
  } catch (const std::invalid_argument& e) {
    return fail("invalid_argument", e.what());
  } catch (const std::out_of_range& e) {
    return fail("out_of_range", e.what());
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
  return 0;
}
