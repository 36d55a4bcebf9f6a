#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "skewwalk/errors.hpp"
#include "skewwalk/skew_param.hpp"

namespace skewwalk {

/// Largest step count the exact DP will attempt before raising a resource
/// error (two dense buffers of 2k+1 doubles each).
inline constexpr long long kMaxExactSteps = 2'000'000;

inline constexpr double kMassTolerance = 1e-12;

/// Exact law of the walk after `step_index` steps, stored densely:
/// weights[i] is the probability of lattice point min_support + i. Only
/// points with m == step_index (mod 2) can carry mass; the off-parity slots
/// are structural zeros.
class LatticePmf {
 public:
  LatticePmf(long long min_support, std::vector<double> weights,
             long long step_index)
      : min_support_(min_support),
        weights_(std::move(weights)),
        step_index_(step_index) {}

  /// Point mass at m, step index 0.
  static LatticePmf delta(long long m = 0) {
    return LatticePmf(m, {1.0}, 0);
  }

  long long min_support() const noexcept { return min_support_; }
  long long max_support() const noexcept {
    return min_support_ + static_cast<long long>(weights_.size()) - 1;
  }
  long long step_index() const noexcept { return step_index_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  double prob(long long m) const noexcept {
    if (m < min_support() || m > max_support()) return 0.0;
    return weights_[static_cast<std::size_t>(m - min_support_)];
  }

  double mass() const noexcept {
    double total = 0.0;
    for (double w : weights_) total += w;
    return total;
  }

  /// Checks the type invariants: unit mass, nonnegativity, support inside
  /// [-k, k], parity m == k (mod 2) wherever mass sits.
  void validate(double tol = kMassTolerance) const {
    double total = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      const double w = weights_[i];
      if (!(w >= 0.0)) throw std::logic_error("pmf weight is negative");
      if (w > 0.0) {
        const long long m = min_support_ + static_cast<long long>(i);
        if (m < -step_index_ || m > step_index_)
          throw std::logic_error("pmf support escapes [-k, k]");
        if (((m % 2) + 2) % 2 != ((step_index_ % 2) + 2) % 2)
          throw std::logic_error("pmf mass at off-parity point");
      }
      total += w;
    }
    if (std::abs(total - 1.0) > tol)
      throw std::logic_error("pmf mass drifted from 1");
  }

 private:
  long long min_support_;
  std::vector<double> weights_;
  long long step_index_;
};

/// One transition of the skew kernel: mass at the origin sends alpha right
/// and 1-alpha left, mass elsewhere splits half/half.
inline LatticePmf step(const LatticePmf& pmf, const SkewParam& p) {
  const long long lo = pmf.min_support() - 1;
  const std::size_t n = pmf.weights().size() + 2;
  std::vector<double> out(n, 0.0);
  const double* w = pmf.weights().data();
  for (std::size_t i = 0; i < pmf.weights().size(); ++i) {
    const double wi = w[i];
    if (wi == 0.0) continue;
    const long long m = pmf.min_support() + static_cast<long long>(i);
    out[i + 2] += wi * p.up_prob(m);
    out[i] += wi * p.down_prob(m);
  }
  return LatticePmf(lo, std::move(out), pmf.step_index() + 1);
}

/// Exact law of the walk after k steps started at the origin.
inline LatticePmf exact_pmf(const SkewParam& p, long long k) {
  if (k < 0) throw std::domain_error("step count must be nonnegative");
  if (k > kMaxExactSteps)
    throw resource_error("exact pmf step count exceeds the memory budget");
  // Evolve in place over a fixed window [-k, k] to avoid k reallocations.
  std::vector<double> cur(static_cast<std::size_t>(2 * k + 1), 0.0);
  std::vector<double> nxt(cur.size(), 0.0);
  cur[static_cast<std::size_t>(k)] = 1.0;  // origin
  for (long long s = 0; s < k; ++s) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (long long m = -s; m <= s; m += 2) {
      const double wm = cur[static_cast<std::size_t>(m + k)];
      if (wm == 0.0) continue;
      nxt[static_cast<std::size_t>(m + 1 + k)] += wm * p.up_prob(m);
      nxt[static_cast<std::size_t>(m - 1 + k)] += wm * p.down_prob(m);
    }
    cur.swap(nxt);
  }
  return LatticePmf(-k, std::move(cur), k);
}

/// Exact law of |S_k| for the simple symmetric walk, obtained by folding the
/// symmetric law: mass(m) = ssrw(m) + ssrw(-m) for m > 0, mass(0) = ssrw(0).
inline LatticePmf reflected_pmf(long long k) {
  LatticePmf sym = exact_pmf(SkewParam(0.5), k);
  std::vector<double> folded(static_cast<std::size_t>(k + 1), 0.0);
  for (long long m = 0; m <= k; ++m) {
    double w = sym.prob(m);
    if (m > 0) w += sym.prob(-m);
    folded[static_cast<std::size_t>(m)] = w;
  }
  return LatticePmf(0, std::move(folded), k);
}

/// n-step law of the skew walk assembled from the reflected law alone:
/// alpha * P(|S_k| = m) above the origin, (1-alpha) * P(|S_k| = -m) below,
/// and the reflected mass itself at the origin.
inline LatticePmf factorized_pmf(const SkewParam& p, long long k) {
  LatticePmf refl = reflected_pmf(k);
  std::vector<double> out(static_cast<std::size_t>(2 * k + 1), 0.0);
  out[static_cast<std::size_t>(k)] = refl.prob(0);
  for (long long m = 1; m <= k; ++m) {
    const double rm = refl.prob(m);
    out[static_cast<std::size_t>(k + m)] = p.alpha() * rm;
    out[static_cast<std::size_t>(k - m)] = (1.0 - p.alpha()) * rm;
  }
  return LatticePmf(-k, std::move(out), k);
}

struct ConditionalIncrementMoments {
  double mean_at_origin;   // 2*alpha - 1
  double mean_off_origin;  // 0
  double second_moment;    // 1
};

/// Kernel-level conditional increment moments under the given occupation
/// law. The off-origin mean aggregates the per-state kernel means weighted
/// by the pmf; the second moment is the mass-normalised weighted average so
/// it is exact even when the pmf mass has drifted by a few ulp.
inline ConditionalIncrementMoments conditional_increment_moments(
    const LatticePmf& pmf, const SkewParam& p) {
  double off_mass = 0.0, off_mean = 0.0;
  double total = 0.0, second = 0.0;
  for (std::size_t i = 0; i < pmf.weights().size(); ++i) {
    const double w = pmf.weights()[i];
    if (w == 0.0) continue;
    const long long m = pmf.min_support() + static_cast<long long>(i);
    const double mean_m = p.up_prob(m) - p.down_prob(m);
    const double second_m = p.up_prob(m) + p.down_prob(m);
    total += w;
    second += w * second_m;
    if (m != 0) {
      off_mass += w;
      off_mean += w * mean_m;
    }
  }
  ConditionalIncrementMoments out;
  out.mean_at_origin = p.origin_bias();
  out.mean_off_origin = off_mass > 0.0 ? off_mean / off_mass : 0.0;
  out.second_moment = total > 0.0 ? second / total : 1.0;
  return out;
}

}  // namespace skewwalk
