#include "l0rec/encoder.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "l0rec/csv.hpp"
#include "l0rec/parallel.hpp"
#include "l0rec/rng.hpp"

namespace l0rec {

MatrixIdentity MatrixIdentity::of(const SeededDesignMatrix& mat) {
  return {mat.seed(), mat.alpha(), mat.rows(), mat.cols(), mat.params().overflow_cap};
}

SeededDesignMatrix MatrixIdentity::regenerate() const {
  return SeededDesignMatrix(seed, n, m, StableParams{alpha, overflow_cap});
}

std::string NoiseStep::describe() const {
  if (kind == Kind::kAdditive) {
    return "additive(sigma=" + csv::fmt(sigma) + ";seed=" + std::to_string(seed) + ")";
  }
  return "multiplicative(rho[" + std::to_string(rho.size()) + "])";
}

std::string MeasurementVector::noise_description() const {
  if (noise.empty()) return "none";
  std::string out;
  for (const auto& step : noise) {
    if (!out.empty()) out += '+';
    out += step.describe();
  }
  return out;
}

MeasurementVector measure(const SparseSignal& x, const SeededDesignMatrix& mat) {
  if (x.size() != mat.rows()) {
    throw std::invalid_argument("signal length " + std::to_string(x.size()) +
                                " does not match N = " + std::to_string(mat.rows()));
  }
  MeasurementVector out;
  out.matrix = MatrixIdentity::of(mat);
  out.y = Vector::Zero(mat.cols());
  const auto support = support_of(x);
  // Each y_j sums in ascending i no matter how j is scheduled.
  parallel_for(0, mat.cols(), [&](Index j) {
    double acc = 0.0;
    for (Index i : support) acc += x[i] * mat.entry(i, j);
    out.y[j] = acc;
  });
  return out;
}

void turnstile_update(MeasurementVector& meas, const SeededDesignMatrix& mat, Index i, double delta) {
  if (!(meas.matrix == MatrixIdentity::of(mat))) {
    throw std::invalid_argument("turnstile update against a different design matrix");
  }
  if (i < 0 || i >= mat.rows()) throw std::out_of_range("turnstile index out of range");
  if (delta == 0.0) return;
  for (Index j = 0; j < mat.cols(); ++j) meas.y[j] += delta * mat.entry(i, j);
}

void add_noise(MeasurementVector& meas, double sigma, std::uint64_t noise_seed, bool scale_by_n) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be finite and >= 0");
  const double sd = scale_by_n ? sigma * std::sqrt(static_cast<double>(meas.matrix.n)) : sigma;
  if (sd == 0.0) return;
  CounterStream rng(noise_seed, Stream::kNoise);
  for (Index j = 0; j < meas.size(); ++j) meas.y[j] += sd * rng.next_normal();
  NoiseStep step;
  step.kind = NoiseStep::Kind::kAdditive;
  step.sigma = sd;
  step.seed = noise_seed;
  meas.noise.push_back(step);
}

void apply_multiplicative(MeasurementVector& meas, const Vector& rho) {
  if (rho.size() != meas.size()) throw std::invalid_argument("rho length must equal M");
  for (Index j = 0; j < rho.size(); ++j) {
    if (!(rho[j] > 0.0) || !std::isfinite(rho[j])) {
      throw std::invalid_argument("rho_" + std::to_string(j) + " must be positive and finite");
    }
  }
  meas.y.array() *= rho.array();
  NoiseStep step;
  step.kind = NoiseStep::Kind::kMultiplicative;
  step.rho = rho;
  meas.noise.push_back(step);
}

Vector rho_pattern(const std::string& pattern, Index m) {
  const auto colon = pattern.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("rho pattern must be kind:value");
  const std::string kind = pattern.substr(0, colon);
  const double r = csv::parse_double(pattern.substr(colon + 1));
  if (!(r > 0.0)) throw std::invalid_argument("rho pattern value must be positive");
  if (kind == "const") return Vector::Constant(m, r);
  if (kind == "alternating") {
    Vector rho(m);
    for (Index j = 0; j < m; ++j) rho[j] = (j % 2 == 0) ? r : 1.0 / r;
    return rho;
  }
  throw std::invalid_argument("unknown rho pattern '" + kind + "'");
}

namespace {

constexpr const char* kMeasurementFormat = "l0rec-measurements-1";

}  // namespace

void write_measurements(std::ostream& os, const MeasurementVector& meas) {
  const auto& id = meas.matrix;
  csv::write_row(os, {"format", kMeasurementFormat});
  csv::write_row(os, {"seed", std::to_string(id.seed)});
  csv::write_row(os, {"alpha", csv::fmt(id.alpha)});
  csv::write_row(os, {"n", std::to_string(id.n)});
  csv::write_row(os, {"m", std::to_string(id.m)});
  csv::write_row(os, {"overflow_cap", csv::fmt(id.overflow_cap)});
  csv::write_row(os, {"noise_desc", meas.noise_description()});
  for (const auto& step : meas.noise) {
    std::vector<std::string> row{"noise"};
    if (step.kind == NoiseStep::Kind::kAdditive) {
      row.insert(row.end(), {"additive", csv::fmt(step.sigma), std::to_string(step.seed)});
    } else {
      row.push_back("multiplicative");
      for (Index j = 0; j < step.rho.size(); ++j) row.push_back(csv::fmt(step.rho[j]));
    }
    csv::write_row(os, row);
  }
  csv::write_row(os, {"j", "y"});
  for (Index j = 0; j < meas.size(); ++j) csv::write_row(os, {std::to_string(j), csv::fmt(meas.y[j])});
}

MeasurementVector read_measurements(std::istream& is) {
  MeasurementVector meas;
  std::string line;
  bool saw_format = false;
  bool in_data = false;
  Index next_j = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (!in_data) {
      const std::string& key = f[0];
      auto value = [&]() -> const std::string& {
        if (f.size() < 2) throw std::runtime_error("measurement header '" + key + "' has no value");
        return f[1];
      };
      if (key == "format") {
        if (value() != kMeasurementFormat) throw std::runtime_error("unsupported measurement format '" + f[1] + "'");
        saw_format = true;
      } else if (key == "seed") {
        meas.matrix.seed = std::stoull(value());
      } else if (key == "alpha") {
        meas.matrix.alpha = csv::parse_double(value());
      } else if (key == "n") {
        meas.matrix.n = csv::parse_int(value());
      } else if (key == "m") {
        meas.matrix.m = csv::parse_int(value());
        if (meas.matrix.m <= 0) throw std::runtime_error("measurement header m must be positive");
        meas.y = Vector::Constant(meas.matrix.m, std::nan(""));
      } else if (key == "overflow_cap") {
        meas.matrix.overflow_cap = csv::parse_double(value());
      } else if (key == "noise_desc") {
        // derived from the noise rows
      } else if (key == "noise") {
        NoiseStep step;
        if (value() == "additive" && f.size() == 4) {
          step.kind = NoiseStep::Kind::kAdditive;
          step.sigma = csv::parse_double(f[2]);
          step.seed = std::stoull(f[3]);
        } else if (f[1] == "multiplicative") {
          step.kind = NoiseStep::Kind::kMultiplicative;
          step.rho.resize(static_cast<Index>(f.size()) - 2);
          for (std::size_t k = 2; k < f.size(); ++k) step.rho[static_cast<Index>(k - 2)] = csv::parse_double(f[k]);
        } else {
          throw std::runtime_error("malformed noise row");
        }
        meas.noise.push_back(step);
      } else if (key == "j") {
        if (!saw_format || meas.y.size() == 0) throw std::runtime_error("measurement header incomplete");
        in_data = true;
      } else {
        throw std::runtime_error("unknown measurement header key '" + key + "'");
      }
      continue;
    }
    if (f.size() != 2) throw std::runtime_error("measurement row must have 2 fields");
    const Index j = csv::parse_int(f[0]);
    if (j != next_j || j >= meas.matrix.m) throw std::runtime_error("measurement rows out of order at j = " + f[0]);
    meas.y[j] = csv::parse_double(f[1]);
    ++next_j;
  }
  if (!in_data) throw std::runtime_error("measurement file has no data section");
  if (next_j != meas.matrix.m) throw std::runtime_error("measurement file truncated");
  return meas;
}

}  // namespace l0rec
