#include "l0rec/stable.hpp"

#include <string>

namespace l0rec {

void StableParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw std::invalid_argument("alpha must lie in (0, 2], got " + std::to_string(alpha));
  }
  if (!(std::isfinite(overflow_cap) && overflow_cap > 1.0)) {
    throw std::invalid_argument("overflow_cap must be finite and > 1");
  }
}

double cms_log_abs(double u, double w, double alpha) {
  const double gamma = (1.0 - alpha) / alpha;
  return std::log(std::abs(std::sin(alpha * u))) - std::log(std::cos(u)) / alpha +
         gamma * (std::log(std::cos(u - alpha * u)) - std::log(w));
}

StableDraw stable_draw(std::uint64_t seed, Index i, Index j, std::uint32_t retry) {
  const auto ii = static_cast<std::uint64_t>(i);
  const PhiloxCounter ctr{static_cast<std::uint32_t>(j), retry, static_cast<std::uint32_t>(ii),
                          static_cast<std::uint32_t>(ii >> 32)};
  const UniformPair p = uniform_pair(stream_key(seed, Stream::kDesignMatrix), ctr);
  return {(p.first - 0.5) * std::numbers::pi, -std::log(p.second)};
}

SeededDesignMatrix::SeededDesignMatrix(std::uint64_t seed, Index n, Index m, StableParams params)
    : seed_(seed), n_(n), m_(m), params_(params) {
  params_.validate();
  if (n <= 0 || m <= 0) throw std::invalid_argument("design matrix dimensions must be positive");
  if (m > Index{0xFFFFFFFF}) throw std::invalid_argument("M must fit in 32 bits");
}

double SeededDesignMatrix::entry(Index i, Index j) const {
  if (i < 0 || i >= n_ || j < 0 || j >= m_) throw std::out_of_range("design matrix index out of range");
  for (std::uint32_t retry = 0; retry < kMaxRetries; ++retry) {
    const StableDraw d = stable_draw(seed_, i, j, retry);
    const double z = cms_transform(d.u, d.w, params_.alpha);
    if (z != 0.0 && std::abs(z) <= params_.overflow_cap) return z;
  }
  throw std::runtime_error("design matrix entry rejected " + std::to_string(kMaxRetries) +
                           " times; PRNG is broken");
}

Vector SeededDesignMatrix::row(Index i) const {
  Vector r(m_);
  row_into(i, r);
  return r;
}

void SeededDesignMatrix::row_into(Index i, Eigen::Ref<Vector> out) const {
  if (i < 0 || i >= n_) throw std::out_of_range("row index out of range");
  for (Index j = 0; j < m_; ++j) out[j] = entry(i, j);
}

Matrix SeededDesignMatrix::materialize() const {
  Matrix s(n_, m_);
  for (Index i = 0; i < n_; ++i) {
    for (Index j = 0; j < m_; ++j) s(i, j) = entry(i, j);
  }
  return s;
}

SeededDesignMatrix SeededDesignMatrix::with_alpha(double alpha) const {
  StableParams p = params_;
  p.alpha = alpha;
  return SeededDesignMatrix(seed_, n_, m_, p);
}

bool SeededDesignMatrix::same_identity(const SeededDesignMatrix& other) const {
  return seed_ == other.seed_ && n_ == other.n_ && m_ == other.m_ &&
         params_.alpha == other.params_.alpha && params_.overflow_cap == other.params_.overflow_cap;
}

}  // namespace l0rec
