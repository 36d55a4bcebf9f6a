#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "skewwalk/errors.hpp"
#include "skewwalk/lattice_pmf.hpp"
#include "skewwalk/path_sample.hpp"
#include "skewwalk/rng.hpp"
#include "skewwalk/skew_param.hpp"
#include "skewwalk/stats.hpp"
#include "skewwalk/threading.hpp"

namespace skewwalk {

/// Replicates are partitioned into fixed-size chunks for parallel runs;
/// floating-point reductions combine the chunk partials in chunk order, so
/// results do not depend on the worker count.
inline constexpr std::size_t kMcChunk = 65536;

namespace detail {

// Substream tags used by the excursion sampler; they sit in the upper half
// of the id space so they cannot collide with caller stream ids.
inline constexpr std::uint64_t kExcursionWalkTag = 0x8000000000000000ULL;
inline constexpr std::uint64_t kExcursionSignTag = 0xc000000000000000ULL;

// Every sampler consumes exactly one draw per step (forced moves of the
// folded kernel burn theirs), so replicate r of a k-step experiment owns
// the block [r*k, (r+1)*k) of its stream.
inline PathSample sample_reflected_path(std::size_t n, const RngContract& rng,
                                        std::uint64_t block_offset = 0) {
  PathSample path;
  path.positions.reserve(n + 1);
  path.positions.push_back(0);
  SplitMix64 gen(rng);
  gen.discard(block_offset);
  std::int32_t r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool up = gen.bernoulli(0.5);
    if (r == 0)
      r = 1;  // forced step at the origin
    else
      r += up ? 1 : -1;
    path.positions.push_back(r);
  }
  return path;
}

inline PathSample sample_path_excursion_raw(double sign_up_prob, double alpha,
                                            std::size_t n,
                                            const RngContract& rng,
                                            std::uint64_t block_offset = 0) {
  const RngContract walk_rng{rng.master_seed,
                             rng.stream_id ^ kExcursionWalkTag};
  const RngContract sign_rng{rng.master_seed,
                             rng.stream_id ^ kExcursionSignTag};
  PathSample reflected = sample_reflected_path(n, walk_rng, block_offset);
  SplitMix64 signs(sign_rng);
  signs.discard(block_offset);
  PathSample path;
  path.positions.reserve(n + 1);
  path.positions.push_back(0);
  path.alpha = alpha;
  path.master_seed = rng.master_seed;
  path.stream_id = rng.stream_id;
  path.sampler = SamplerId::excursion;
  std::int32_t sign = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::int32_t r = reflected.positions[i];
    if (reflected.positions[i - 1] == 0) {
      // A fresh excursion starts here; the final incomplete one is signed
      // the same way.
      sign = signs.bernoulli(sign_up_prob) ? 1 : -1;
    }
    path.positions.push_back(sign * r);
  }
  return path;
}

}  // namespace detail

/// Path drawn step by step from the one-step kernel: up with probability
/// alpha at the origin, fair coin elsewhere.
inline PathSample sample_path_direct(const SkewParam& p, std::size_t n,
                                     const RngContract& rng,
                                     std::uint64_t block_offset = 0) {
  PathSample path;
  path.positions.reserve(n + 1);
  path.positions.push_back(0);
  path.alpha = p.alpha();
  path.master_seed = rng.master_seed;
  path.stream_id = rng.stream_id;
  path.sampler = SamplerId::direct;
  SplitMix64 gen(rng);
  gen.discard(block_offset);
  std::int32_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double up = pos == 0 ? p.alpha() : 0.5;
    pos += gen.bernoulli(up) ? 1 : -1;
    path.positions.push_back(pos);
  }
  return path;
}

/// Path built from a reflected simple symmetric walk whose excursions away
/// from the origin receive independent signs, + with probability alpha.
inline PathSample sample_path_excursion(const SkewParam& p, std::size_t n,
                                        const RngContract& rng,
                                        std::uint64_t block_offset = 0) {
  return detail::sample_path_excursion_raw(p.alpha(), p.alpha(), n, rng,
                                           block_offset);
}

inline PathSample sample_path(const SkewParam& p, std::size_t n,
                              const RngContract& rng, SamplerId sampler,
                              std::uint64_t block_offset = 0) {
  return sampler == SamplerId::direct
             ? sample_path_direct(p, n, rng, block_offset)
             : sample_path_excursion(p, n, rng, block_offset);
}

struct McMoment {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t replicates = 0;
};

struct McOptions {
  unsigned threads = 1;
  SamplerId sampler = SamplerId::direct;
};

/// Monte Carlo estimate of E|S_k - S_j|^4 with its standard error.
inline McMoment mc_fourth_moment(const SkewParam& p, std::size_t n,
                                 std::size_t j, std::size_t k,
                                 std::size_t replicates,
                                 const RngContract& rng,
                                 const McOptions& options = {}) {
  if (replicates < 2)
    throw std::domain_error("standard error needs at least 2 replicates");
  if (!(j < k && k <= n))
    throw std::domain_error("indices must satisfy j < k <= n");
  const std::size_t chunks = (replicates + kMcChunk - 1) / kMcChunk;
  std::vector<CompensatedSum> sums(chunks), squares(chunks);
  parallel_tasks(chunks, options.threads, [&](std::size_t c) {
    const std::size_t begin = c * kMcChunk;
    const std::size_t end = std::min(replicates, begin + kMcChunk);
    CompensatedSum sum, square;
    for (std::size_t r = begin; r < end; ++r) {
      const PathSample path = sample_path(p, k, rng, options.sampler,
                                          static_cast<std::uint64_t>(r) * k);
      const double diff =
          static_cast<double>(path.positions[k] - path.positions[j]);
      const double quad = diff * diff * diff * diff;
      sum.add(quad);
      square.add(quad * quad);
    }
    sums[c] = sum;
    squares[c] = square;
  });
  CompensatedSum total, total_sq;
  for (std::size_t c = 0; c < chunks; ++c) {
    total.add(sums[c].value());
    total_sq.add(squares[c].value());
  }
  const double nrep = static_cast<double>(replicates);
  const double mean = total.value() / nrep;
  const double var =
      std::max(0.0, (total_sq.value() - nrep * mean * mean) / (nrep - 1.0));
  McMoment out;
  out.estimate = mean;
  out.std_error = std::sqrt(var / nrep);
  out.replicates = replicates;
  return out;
}

/// Marginal CDF of the skew Brownian motion at time t > 0:
///   F(y) = 2 (1-alpha) Phi(y / sqrt(t))                 y <  0
///   F(y) = (1-alpha) + alpha (2 Phi(y / sqrt(t)) - 1)   y >= 0.
inline double skew_bm_cdf(const SkewParam& p, double t, double y) {
  if (!(t > 0.0)) throw std::domain_error("time must be positive");
  const double phi = normal_cdf(y / std::sqrt(t));
  if (y < 0.0) return 2.0 * (1.0 - p.alpha()) * phi;
  return (1.0 - p.alpha()) + p.alpha() * (2.0 * phi - 1.0);
}

/// Endpoint counts of `replicates` sampled k-step paths over the lattice
/// [-k, k]; bin i holds the count of endpoint i - k. Counts are integers, so
/// the chunked reduction is exact for any worker count.
inline std::vector<double> empirical_endpoint_counts(
    const SkewParam& p, std::size_t k, std::size_t replicates,
    const RngContract& rng, SamplerId sampler = SamplerId::direct,
    unsigned threads = 1) {
  const std::size_t width = 2 * k + 1;
  const std::size_t chunks = (replicates + kMcChunk - 1) / kMcChunk;
  std::vector<std::vector<double>> partial(chunks);
  parallel_tasks(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * kMcChunk;
    const std::size_t end = std::min(replicates, begin + kMcChunk);
    std::vector<double> counts(width, 0.0);
    for (std::size_t r = begin; r < end; ++r) {
      const PathSample path =
          sample_path(p, k, rng, sampler, static_cast<std::uint64_t>(r) * k);
      const std::int64_t endpoint = path.positions.back();
      counts[static_cast<std::size_t>(endpoint +
                                      static_cast<std::int64_t>(k))] += 1.0;
    }
    partial[c] = std::move(counts);
  });
  std::vector<double> counts(width, 0.0);
  for (const auto& part : partial)
    for (std::size_t i = 0; i < width; ++i) counts[i] += part[i];
  return counts;
}

enum class KsMode { exact, empirical };

/// Sup distance between the law of X_n(t) = S_[nt] / sqrt(n) (exact from
/// the lattice DP, or empirical over replicates) and the skew Brownian
/// marginal, evaluated on both sides of every lattice jump point.
inline double ks_statistic(const SkewParam& p, long long n, double t,
                           KsMode mode, const RngContract& rng = {},
                           std::size_t replicates = 0, unsigned threads = 1) {
  if (n < 1) throw std::domain_error("scale must be >= 1");
  const double stepsd = static_cast<double>(n) * t;
  const long long steps = std::llround(stepsd);
  if (steps < 1 || std::abs(stepsd - static_cast<double>(steps)) > 1e-9)
    throw std::domain_error("n*t must be a positive integer");
  const double root_n = std::sqrt(static_cast<double>(n));
  auto limit_cdf = [&](double y) { return skew_bm_cdf(p, t, y); };
  std::vector<double> points, masses;
  if (mode == KsMode::exact) {
    const LatticePmf pmf = exact_pmf(p, steps);
    for (long long m = -steps; m <= steps; ++m) {
      const double w = pmf.prob(m);
      if (w == 0.0) continue;
      points.push_back(static_cast<double>(m) / root_n);
      masses.push_back(w);
    }
  } else {
    if (replicates == 0)
      throw std::domain_error("empirical mode needs replicates >= 1");
    const std::vector<double> counts = empirical_endpoint_counts(
        p, static_cast<std::size_t>(steps), replicates, rng,
        SamplerId::direct, threads);
    const double total = static_cast<double>(replicates);
    for (long long m = -steps; m <= steps; ++m) {
      const double c = counts[static_cast<std::size_t>(m + steps)];
      if (c == 0.0) continue;
      points.push_back(static_cast<double>(m) / root_n);
      masses.push_back(c / total);
    }
  }
  return ks_lattice_vs_continuous(points, masses, limit_cdf);
}

}  // namespace skewwalk
