#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace skewwalk {

/// Standard normal CDF via erfc; absolute error is a few ulp, far below
/// every tolerance in use.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace detail {

// Regularized lower incomplete gamma by series expansion (x < a+1).
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma by continued fraction (x >= a+1).
inline double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(a, x); the chi-square upper tail is
/// Q(dof/2, x/2).
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

inline double chi2_upper_tail(double statistic, std::size_t dof) {
  if (dof == 0) return 1.0;
  return gamma_q(0.5 * static_cast<double>(dof), 0.5 * statistic);
}

struct Chi2Result {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness of fit of observed counts against model probabilities
/// over aligned bins. Bins are pooled left to right until each pooled bin
/// carries at least `min_expected` expected counts; a trailing underweight
/// pool is merged into the last kept bin.
inline Chi2Result chi2_goodness_of_fit(const std::vector<double>& counts,
                                       const std::vector<double>& probs,
                                       double total,
                                       double min_expected = 5.0) {
  if (counts.size() != probs.size())
    throw std::invalid_argument("chi2 bins are misaligned");
  std::vector<double> obs_pool, exp_pool;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    o += counts[i];
    e += probs[i] * total;
    if (e >= min_expected) {
      obs_pool.push_back(o);
      exp_pool.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (exp_pool.empty()) {
      obs_pool.push_back(o);
      exp_pool.push_back(e);
    } else {
      obs_pool.back() += o;
      exp_pool.back() += e;
    }
  }
  Chi2Result r;
  for (std::size_t i = 0; i < obs_pool.size(); ++i) {
    const double diff = obs_pool[i] - exp_pool[i];
    if (exp_pool[i] > 0.0) r.statistic += diff * diff / exp_pool[i];
  }
  r.dof = obs_pool.size() > 1 ? obs_pool.size() - 1 : 1;
  r.p_value = chi2_upper_tail(r.statistic, r.dof);
  return r;
}

/// Two-sample chi-square for equal-size samples over aligned bins:
/// sum (O1-O2)^2 / (O1+O2) after pooling thin bins.
inline Chi2Result chi2_two_sample(const std::vector<double>& a,
                                  const std::vector<double>& b,
                                  double min_expected = 5.0) {
  if (a.size() != b.size())
    throw std::invalid_argument("chi2 bins are misaligned");
  std::vector<double> pa, pb;
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    if (0.5 * (sa + sb) >= min_expected) {
      pa.push_back(sa);
      pb.push_back(sb);
      sa = sb = 0.0;
    }
  }
  if (sa > 0.0 || sb > 0.0) {
    if (pa.empty()) {
      pa.push_back(sa);
      pb.push_back(sb);
    } else {
      pa.back() += sa;
      pb.back() += sb;
    }
  }
  Chi2Result r;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double denom = pa[i] + pb[i];
    if (denom > 0.0) {
      const double diff = pa[i] - pb[i];
      r.statistic += diff * diff / denom;
    }
  }
  r.dof = pa.size() > 1 ? pa.size() - 1 : 1;
  r.p_value = chi2_upper_tail(r.statistic, r.dof);
  return r;
}

/// Sup distance between the CDF of a lattice-supported law (jump points
/// `points[i]` with mass `masses[i]`, ascending) and a continuous CDF F.
/// Both sides of every jump are checked.
inline double ks_lattice_vs_continuous(
    const std::vector<double>& points, const std::vector<double>& masses,
    const std::function<double(double)>& cdf) {
  double sup = 0.0;
  double c = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double f = cdf(points[i]);
    sup = std::max(sup, std::abs(c - f));  // just below the jump
    c += masses[i];
    sup = std::max(sup, std::abs(c - f));  // just above the jump
  }
  return sup;
}

}  // namespace skewwalk
