#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "skewwalk/skew_param.hpp"

namespace skewwalk {

/// Nonnegative real sequence indexed from 0 with a name tag. Houses the
/// return-probability sequence g and its convolution powers mu = g*g and
/// nu = g*g*g*g.
struct ConvSeq {
  std::string label;
  std::vector<double> values;

  std::size_t kmax() const noexcept { return values.empty() ? 0 : values.size() - 1; }
  double operator[](std::size_t i) const { return values.at(i); }
};

/// g(2i) = C(2i,i) 2^(-2i), g(odd) = 0: the probability that the simple
/// symmetric walk is back at the origin after k steps. Built with the
/// multiplicative recurrence g(2i) = g(2i-2) * (2i-1)/(2i), which stays in
/// range for every i (factorials overflow past k ~ 170).
inline ConvSeq g_seq(std::size_t kmax) {
  ConvSeq s{"g", std::vector<double>(kmax + 1, 0.0)};
  s.values[0] = 1.0;
  double even = 1.0;
  for (std::size_t i = 2; i <= kmax; i += 2) {
    even *= static_cast<double>(i - 1) / static_cast<double>(i);
    s.values[i] = even;
  }
  return s;
}

/// Truncated convolution (a*b)(n) = sum_{j<=n} a(j) b(n-j), defined for
/// n < min(len(a), len(b)). Zero entries of `a` are skipped, which makes the
/// even-support sequences used here convolve at a quarter of the dense cost.
inline ConvSeq convolve(const ConvSeq& a, const ConvSeq& b) {
  const std::size_t len = std::min(a.values.size(), b.values.size());
  ConvSeq out{a.label + "*" + b.label, std::vector<double>(len, 0.0)};
  for (std::size_t j = 0; j < len; ++j) {
    const double aj = a.values[j];
    if (aj == 0.0) continue;
    const double* bv = b.values.data();
    double* ov = out.values.data() + j;
    const std::size_t span = len - j;
    for (std::size_t i = 0; i < span; ++i) ov[i] += aj * bv[i];
  }
  return out;
}

/// output(n) = sum_{j<=n} s(j).
inline ConvSeq partial_sums(const ConvSeq& s) {
  ConvSeq out{"sum(" + s.label + ")", s.values};
  double acc = 0.0;
  for (double& v : out.values) {
    acc += v;
    v = acc;
  }
  return out;
}

/// Truncated power series sum_{k<=kmax} s(k) t^k, valid for 0 <= t < 1.
inline double gen_fn_eval(const ConvSeq& s, double t) {
  if (!(t >= 0.0 && t < 1.0))
    throw std::domain_error("generating function argument must lie in [0,1)");
  // Horner from the top coefficient keeps the summation order fixed.
  double acc = 0.0;
  for (std::size_t i = s.values.size(); i-- > 0;) acc = acc * t + s.values[i];
  return acc;
}

/// Upper bound on the truncation error of gen_fn_eval for a sequence whose
/// entries beyond kmax are dominated by the last one.
inline double gen_fn_tail_bound(const ConvSeq& s, double t) {
  if (!(t >= 0.0 && t < 1.0))
    throw std::domain_error("generating function argument must lie in [0,1)");
  if (s.values.empty()) return 0.0;
  return s.values.back() * std::pow(t, static_cast<double>(s.kmax())) /
         (1.0 - t);
}

/// Ratio of the partial sums to the regular-variation profile
/// c * n^theta / Gamma(theta). The n = 0 entry has no meaningful ratio and
/// is set to NaN.
inline ConvSeq tauberian_ratio(const ConvSeq& s, double theta, double c) {
  if (!(theta > 0.0)) throw std::domain_error("theta must be positive");
  if (!(c > 0.0)) throw std::domain_error("c must be positive");
  ConvSeq out = partial_sums(s);
  out.label = "tauberian(" + s.label + ")";
  const double gamma_theta = std::tgamma(theta);
  for (std::size_t n = 1; n < out.values.size(); ++n)
    out.values[n] /= c * std::pow(static_cast<double>(n), theta) / gamma_theta;
  if (!out.values.empty()) out.values[0] = std::nan("");
  return out;
}

namespace detail {
// g with the index-0 entry dropped; gap sequences in the ordered sums below
// all start at 1.
inline ConvSeq g_positive(std::size_t kmax) {
  ConvSeq h = g_seq(kmax);
  h.label = "g+";
  if (!h.values.empty()) h.values[0] = 0.0;
  return h;
}
}  // namespace detail

/// (2a-1)^2 * sum over 1 <= i1 < i2 < i3 <= d of g(i1) g(i2-i1), collapsed
/// to a single pass over the convolution g*g: the inner double sum over
/// (i1,i2) with i2 fixed is (g*g)(i2) - 2 g(i2), and each i2 leaves d - i2
/// choices of i3.
inline double a_sum(const SkewParam& p, long long d) {
  if (d < 1) throw std::domain_error("horizon must be at least 1");
  const std::size_t kd = static_cast<std::size_t>(d);
  ConvSeq g = g_seq(kd);
  ConvSeq mu = convolve(g, g);
  double total = 0.0;
  for (std::size_t i2 = 2; i2 + 1 <= kd; ++i2) {
    const double pairs = mu.values[i2] - 2.0 * g.values[i2];
    total += pairs * static_cast<double>(kd - i2);
  }
  const double bias = p.origin_bias();
  return bias * bias * total;
}

/// (2a-1)^4 * sum over 1 <= i1 < i2 < i3 < i4 <= d of the four-fold gap
/// product, which is the partial sum of the fourth convolution power of g
/// restricted to positive indices.
inline double b_sum(const SkewParam& p, long long d) {
  if (d < 1) throw std::domain_error("horizon must be at least 1");
  const std::size_t kd = static_cast<std::size_t>(d);
  ConvSeq h = detail::g_positive(kd);
  ConvSeq h2 = convolve(h, h);
  ConvSeq h4 = convolve(h2, h2);
  double total = 0.0;
  for (double v : h4.values) total += v;
  const double bias = p.origin_bias();
  const double bias2 = bias * bias;
  return bias2 * bias2 * total;
}

}  // namespace skewwalk
