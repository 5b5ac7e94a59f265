#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace l0rec {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// A pure function of (counter, key), which is what makes design-matrix entries
// regenerable in any order.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

constexpr PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Independent stream identifiers. Each consumer of randomness keys its own
/// Philox stream so that, e.g., noise draws never alias design-matrix draws.
enum class Stream : std::uint64_t {
  kDesignMatrix = 1,
  kNoise = 2,
  kSignal = 3,
  kMonteCarlo = 4,
  kIdealized = 5,
  kTrialSeed = 6,
  kImage = 7,
};

constexpr PhiloxKey stream_key(std::uint64_t seed, Stream stream) noexcept {
  const std::uint64_t k = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

/// Child seed for sub-experiment `index` (trial number etc.).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed ^ static_cast<std::uint64_t>(Stream::kTrialSeed)) + index);
}

/// Top 52 bits mapped to the open interval (0, 1). k + 0.5 is exact in a
/// double for k < 2^52, so the endpoints are never produced.
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

struct UniformPair {
  double first;
  double second;
};

constexpr UniformPair uniform_pair(PhiloxKey key, PhiloxCounter ctr) noexcept {
  const PhiloxCounter out = philox4x32(ctr, key);
  const std::uint64_t a = (std::uint64_t{out[0]} << 32) | out[1];
  const std::uint64_t b = (std::uint64_t{out[2]} << 32) | out[3];
  return {to_open_unit(a), to_open_unit(b)};
}

/// Sequential view of a Philox stream: the n-th call uses counter n.
class CounterStream {
 public:
  constexpr CounterStream(std::uint64_t seed, Stream stream, std::uint64_t substream = 0) noexcept
      : key_(stream_key(seed, stream)), substream_(substream) {}

  UniformPair next_pair() noexcept {
    const PhiloxCounter ctr{static_cast<std::uint32_t>(counter_),
                            static_cast<std::uint32_t>(counter_ >> 32),
                            static_cast<std::uint32_t>(substream_),
                            static_cast<std::uint32_t>(substream_ >> 32)};
    ++counter_;
    return uniform_pair(key_, ctr);
  }

  double next_uniform() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const UniformPair p = next_pair();
    spare_ = p.second;
    has_spare_ = true;
    return p.first;
  }

  /// Standard normal via Box-Muller on one counter block.
  double next_normal() noexcept {
    const UniformPair p = next_pair();
    return std::sqrt(-2.0 * std::log(p.first)) * std::cos(2.0 * std::numbers::pi * p.second);
  }

  /// Uniform integer in [0, bound), scaled from an open-interval uniform.
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    const double u = next_uniform();
    auto r = static_cast<std::uint64_t>(u * static_cast<double>(bound));
    return r < bound ? r : bound - 1;
  }

 private:
  PhiloxKey key_;
  std::uint64_t substream_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace l0rec
