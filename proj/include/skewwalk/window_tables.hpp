#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "skewwalk/errors.hpp"
#include "skewwalk/skew_param.hpp"

namespace skewwalk {

/// Conditional window moments of the walk, swept forward in the window
/// length d. With A = S_d - S_0 the tables hold, for every start state m,
///
///   G_a(m,d) = E[A^a | S_0 = m]            a = 0..4
///   H_a(m,d) = E[A^a 1{S_d = 0} | S_0 = m]
///
/// Only the band |m| <= d is stored: a window that starts further out never
/// sees the origin, every step is a fair coin, and the symmetric-walk
/// closed forms apply (G2 = d, G4 = 3d^2 - 2d, odd moments and H zero).
/// One slice update costs O(d), so sweeping to D costs O(D^2) total.
class WindowTableSweep {
 public:
  WindowTableSweep(const SkewParam& p, long long max_len)
      : p_(p), max_len_(max_len), len_(0) {
    if (max_len < 0) throw std::domain_error("window length must be >= 0");
    const std::size_t width = static_cast<std::size_t>(2 * max_len + 1);
    for (auto& v : g_cur_) v.assign(width, 0.0);
    for (auto& v : g_prev_) v.assign(width, 0.0);
    for (auto& v : h_cur_) v.assign(width, 0.0);
    for (auto& v : h_prev_) v.assign(width, 0.0);
    // Slice d = 0: A = 0 identically, the end state is the start state.
    g_cur_[0][idx(0)] = 1.0;
    h_cur_[0][idx(0)] = 1.0;
  }

  long long len() const noexcept { return len_; }
  long long max_len() const noexcept { return max_len_; }

  /// Advance the tables from window length d to d+1.
  void advance() {
    if (len_ >= max_len_) throw std::logic_error("window sweep past max_len");
    const long long d = len_ + 1;
    g_cur_.swap(g_prev_);
    h_cur_.swap(h_prev_);
    for (long long m = -d; m <= d; ++m) {
      const double up = p_.up_prob(m);
      const double dn = p_.down_prob(m);
      std::array<double, 5> gu, gd, hu, hd;
      read_prev(m + 1, d - 1, gu, hu);
      read_prev(m - 1, d - 1, gd, hd);
      const std::size_t i = idx(m);
      // Binomial shift: E[(A'+s)^a] = sum_q C(a,q) s^(a-q) E[A'^q], s = +-1.
      g_cur_[0][i] = up * gu[0] + dn * gd[0];
      g_cur_[1][i] = up * (gu[1] + gu[0]) + dn * (gd[1] - gd[0]);
      g_cur_[2][i] = up * (gu[2] + 2.0 * gu[1] + gu[0]) +
                     dn * (gd[2] - 2.0 * gd[1] + gd[0]);
      g_cur_[3][i] = up * (gu[3] + 3.0 * gu[2] + 3.0 * gu[1] + gu[0]) +
                     dn * (gd[3] - 3.0 * gd[2] + 3.0 * gd[1] - gd[0]);
      g_cur_[4][i] =
          up * (gu[4] + 4.0 * gu[3] + 6.0 * gu[2] + 4.0 * gu[1] + gu[0]) +
          dn * (gd[4] - 4.0 * gd[3] + 6.0 * gd[2] - 4.0 * gd[1] + gd[0]);
      h_cur_[0][i] = up * hu[0] + dn * hd[0];
      h_cur_[1][i] = up * (hu[1] + hu[0]) + dn * (hd[1] - hd[0]);
      h_cur_[2][i] = up * (hu[2] + 2.0 * hu[1] + hu[0]) +
                     dn * (hd[2] - 2.0 * hd[1] + hd[0]);
      h_cur_[3][i] = up * (hu[3] + 3.0 * hu[2] + 3.0 * hu[1] + hu[0]) +
                     dn * (hd[3] - 3.0 * hd[2] + 3.0 * hd[1] - hd[0]);
      h_cur_[4][i] =
          up * (hu[4] + 4.0 * hu[3] + 6.0 * hu[2] + 4.0 * hu[1] + hu[0]) +
          dn * (hd[4] - 4.0 * hd[3] + 6.0 * hd[2] - 4.0 * hd[1] + hd[0]);
    }
    len_ = d;
  }

  void advance_to(long long d) {
    while (len_ < d) advance();
  }

  /// Symmetric-walk moments of a d-step increment sum.
  static double ssrw_moment(int a, long long d) {
    const double dd = static_cast<double>(d);
    switch (a) {
      case 0: return 1.0;
      case 1: return 0.0;
      case 2: return dd;
      case 3: return 0.0;
      case 4: return 3.0 * dd * dd - 2.0 * dd;
      default: throw std::logic_error("moment order out of range");
    }
  }

  /// E[A^a * delta_first] for a window that never reaches the origin.
  static double ssrw_first_weighted(int a, long long d) {
    switch (a) {
      case 0: return 0.0;
      case 1: return 1.0;
      case 2: return 0.0;
      case 3: return 3.0 * static_cast<double>(d) - 2.0;
      default: throw std::logic_error("moment order out of range");
    }
  }

  double G(int a, long long m) const {
    if (m > len_ || m < -len_) return ssrw_moment(a, len_);
    return g_cur_[static_cast<std::size_t>(a)][idx(m)];
  }
  double H(int a, long long m) const {
    if (m > len_ || m < -len_) return 0.0;
    return h_cur_[static_cast<std::size_t>(a)][idx(m)];
  }

  /// First-step weighted moments at the current window length:
  ///   G_first(a,m) = E[A^a * delta_first | S_0 = m]
  ///   H_first(a,m) = E[A^a * delta_first * 1{S_d = 0} | S_0 = m]
  /// assembled from the previous slice, so they are available after the
  /// first advance().
  double G_first(int a, long long m) const {
    return first_weighted(g_prev_, a, m, /*indicator=*/false);
  }
  double H_first(int a, long long m) const {
    return first_weighted(h_prev_, a, m, /*indicator=*/true);
  }

 private:
  using Tables = std::array<std::vector<double>, 5>;

  std::size_t idx(long long m) const {
    return static_cast<std::size_t>(m + max_len_);
  }

  void read_prev(long long m, long long d, std::array<double, 5>& g,
                 std::array<double, 5>& h) const {
    if (m > d || m < -d) {
      for (int a = 0; a <= 4; ++a) g[static_cast<std::size_t>(a)] = ssrw_moment(a, d);
      h.fill(0.0);
      return;
    }
    const std::size_t i = idx(m);
    for (int a = 0; a <= 4; ++a) {
      g[static_cast<std::size_t>(a)] = g_prev_[static_cast<std::size_t>(a)][i];
      h[static_cast<std::size_t>(a)] = h_prev_[static_cast<std::size_t>(a)][i];
    }
  }

  double first_weighted(const Tables& prev, int a, long long m,
                        bool indicator) const {
    if (len_ < 1) throw std::logic_error("first-step moments need d >= 1");
    const long long d = len_;
    if (m > d || m < -d)
      return indicator ? 0.0 : ssrw_first_weighted(a, d);
    const double up = p_.up_prob(m);
    const double dn = p_.down_prob(m);
    auto prev_at = [&](long long y, int q) -> double {
      if (y > d - 1 || y < -(d - 1))
        return indicator ? 0.0 : ssrw_moment(q, d - 1);
      return prev[static_cast<std::size_t>(q)][idx(y)];
    };
    // delta_first * (A' + delta_first)^a expanded with delta^2 = 1.
    double acc_up = 0.0, acc_dn = 0.0;
    switch (a) {
      case 0:
        acc_up = prev_at(m + 1, 0);
        acc_dn = prev_at(m - 1, 0);
        break;
      case 1:
        acc_up = prev_at(m + 1, 1) + prev_at(m + 1, 0);
        acc_dn = prev_at(m - 1, 1) - prev_at(m - 1, 0);
        break;
      case 2:
        acc_up = prev_at(m + 1, 2) + 2.0 * prev_at(m + 1, 1) + prev_at(m + 1, 0);
        acc_dn = prev_at(m - 1, 2) - 2.0 * prev_at(m - 1, 1) + prev_at(m - 1, 0);
        break;
      case 3:
        acc_up = prev_at(m + 1, 3) + 3.0 * prev_at(m + 1, 2) +
                 3.0 * prev_at(m + 1, 1) + prev_at(m + 1, 0);
        acc_dn = prev_at(m - 1, 3) - 3.0 * prev_at(m - 1, 2) +
                 3.0 * prev_at(m - 1, 1) - prev_at(m - 1, 0);
        break;
      default:
        throw std::logic_error("first-step moment order out of range");
    }
    return up * acc_up - dn * acc_dn;
  }

  SkewParam p_;
  long long max_len_;
  long long len_;
  Tables g_cur_, g_prev_, h_cur_, h_prev_;
};

}  // namespace skewwalk
