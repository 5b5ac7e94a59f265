#include "l0rec/ideal.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "l0rec/bounds.hpp"
#include "l0rec/csv.hpp"
#include "l0rec/parallel.hpp"
#include "l0rec/rng.hpp"

namespace l0rec {

IdealOutcome simulate_ideal_with(const IdealInstance& inst, const IdealPicker& pick) {
  if (inst.k < 1) throw std::invalid_argument("idealized model needs K >= 1");
  if (inst.m < 0) throw std::invalid_argument("idealized model needs M >= 0");
  const auto k = static_cast<std::size_t>(inst.k);
  const auto m = static_cast<std::size_t>(inst.m);

  std::vector<std::int64_t> remaining(k);
  for (std::size_t c = 0; c < k; ++c) remaining[c] = static_cast<std::int64_t>(c);
  std::vector<char> recovered(k, 0);
  std::vector<std::int64_t> owner(m, -1);
  std::vector<std::int64_t> hits(k, 0);

  IdealOutcome out;
  while (!remaining.empty()) {
    const auto n = static_cast<std::int64_t>(remaining.size());
    for (std::size_t j = 0; j < m; ++j) {
      if (inst.fresh_projections || owner[j] < 0) {
        const std::int64_t idx = pick(static_cast<std::int64_t>(j), n);
        if (idx < 0 || idx >= n) throw std::out_of_range("idealized picker returned an invalid index");
        owner[j] = remaining[static_cast<std::size_t>(idx)];
      }
    }
    std::fill(hits.begin(), hits.end(), 0);
    for (std::size_t j = 0; j < m; ++j) ++hits[static_cast<std::size_t>(owner[j])];

    std::vector<std::int64_t> still;
    std::int64_t newly = 0;
    for (std::int64_t c : remaining) {
      if (hits[static_cast<std::size_t>(c)] >= 2) {
        recovered[static_cast<std::size_t>(c)] = 1;
        ++newly;
      } else {
        still.push_back(c);
      }
    }
    ++out.iterations;
    if (out.iterations == 1) out.first_iteration_failures = static_cast<std::int64_t>(still.size());
    out.trace.push_back({n, newly, static_cast<std::int64_t>(m)});
    if (newly == 0) break;
    remaining = std::move(still);
    for (std::size_t j = 0; j < m; ++j) {
      if (recovered[static_cast<std::size_t>(owner[j])]) owner[j] = -1;
    }
  }
  out.recovered = inst.k - static_cast<std::int64_t>(remaining.size());
  return out;
}

IdealOutcome simulate_ideal(const IdealInstance& inst) {
  std::vector<CounterStream> streams;
  streams.reserve(static_cast<std::size_t>(std::max<std::int64_t>(inst.m, 0)));
  for (std::int64_t j = 0; j < inst.m; ++j) {
    streams.emplace_back(inst.seed, Stream::kIdealized, static_cast<std::uint64_t>(j));
  }
  return simulate_ideal_with(inst, [&](std::int64_t j, std::int64_t n) {
    return static_cast<std::int64_t>(streams[static_cast<std::size_t>(j)].next_below(static_cast<std::uint64_t>(n)));
  });
}

std::vector<IdealSweepRow> ideal_sweep(const std::vector<std::int64_t>& ks, const std::vector<double>& m_over_k,
                                       double delta, std::int64_t trials, std::uint64_t seed, bool fresh) {
  if (trials < 1) throw std::invalid_argument("ideal sweep needs trials >= 1");
  std::vector<IdealSweepRow> rows;
  for (std::int64_t k : ks) {
    for (double ratio : m_over_k) {
      if (!(ratio >= 0.0)) throw std::invalid_argument("M/K ratios must be >= 0");
      const auto m = static_cast<std::int64_t>(std::llround(ratio * static_cast<double>(k)));
      std::vector<IdealOutcome> outcomes(static_cast<std::size_t>(trials));
      parallel_for(0, trials, [&](Index t) {
        IdealInstance inst{k, m, fresh, derive_seed(seed, static_cast<std::uint64_t>(t))};
        outcomes[static_cast<std::size_t>(t)] = simulate_ideal(inst);
      });
      std::int64_t full = 0;
      double recovered = 0.0;
      double failures = 0.0;
      for (const auto& o : outcomes) {
        if (o.recovered == k) ++full;
        recovered += static_cast<double>(o.recovered);
        failures += static_cast<double>(o.first_iteration_failures);
      }
      const auto tt = static_cast<double>(trials);
      const auto kk = static_cast<double>(k);
      rows.push_back({k, m, ratio, fresh, trials, static_cast<double>(full) / tt, recovered / (tt * kk),
                      failures / (tt * kk), bounds::ideal_failure_prob(k, m), bounds::ideal_total_m(k, delta)});
    }
  }
  return rows;
}

void write_ideal_sweep(std::ostream& os, const std::vector<IdealSweepRow>& rows) {
  csv::write_row(os, {"k", "m", "m_over_k", "fresh", "trials", "full_recovery_rate", "mean_recovered_fraction",
                      "first_iteration_failure_rate", "p_ideal", "ideal_total_m"});
  for (const auto& r : rows) {
    csv::write_row(os, {std::to_string(r.k), std::to_string(r.m), csv::fmt(r.m_over_k), r.fresh ? "1" : "0",
                        std::to_string(r.trials), csv::fmt(r.full_recovery_rate), csv::fmt(r.mean_recovered_fraction),
                        csv::fmt(r.first_iteration_failure_rate), csv::fmt(r.p_ideal), csv::fmt(r.ideal_total_m)});
  }
}

}  // namespace l0rec
