#pragma once

#include <cmath>
#include <stdexcept>

namespace skewwalk {

/// Skewness parameter: the probability of stepping up when the walk sits at
/// the origin. Off the origin the walk is a fair coin. Construction rejects
/// anything outside the open interval (0,1).
class SkewParam {
 public:
  explicit SkewParam(double alpha) : alpha_(alpha) {
    if (!(std::isfinite(alpha) && alpha > 0.0 && alpha < 1.0))
      throw std::domain_error("alpha must lie in (0,1)");
  }

  double alpha() const noexcept { return alpha_; }
  double up_at_origin() const noexcept { return alpha_; }
  double down_at_origin() const noexcept { return 1.0 - alpha_; }

  /// Conditional mean of an increment taken at the origin, 2*alpha - 1.
  double origin_bias() const noexcept { return alpha_ - (1.0 - alpha_); }

  SkewParam mirrored() const { return SkewParam(1.0 - alpha_); }

  /// One-step transition probability out of state m.
  double up_prob(long long m) const noexcept { return m == 0 ? alpha_ : 0.5; }
  double down_prob(long long m) const noexcept {
    return m == 0 ? 1.0 - alpha_ : 0.5;
  }

 private:
  double alpha_;
};

}  // namespace skewwalk
