#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace skewwalk {

enum class SamplerId { direct, excursion };

inline const char* sampler_name(SamplerId s) {
  return s == SamplerId::direct ? "direct" : "excursion";
}

/// One realized trajectory: positions[i] is the walk after i steps,
/// positions[0] = 0 and every increment is +-1.
struct PathSample {
  std::vector<std::int32_t> positions;
  double alpha = 0.5;
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
  SamplerId sampler = SamplerId::direct;

  std::size_t steps() const noexcept {
    return positions.empty() ? 0 : positions.size() - 1;
  }

  void validate() const {
    if (positions.empty() || positions[0] != 0)
      throw std::logic_error("path must start at the origin");
    for (std::size_t i = 0; i + 1 < positions.size(); ++i)
      if (std::abs(positions[i + 1] - positions[i]) != 1)
        throw std::logic_error("path increment is not +-1");
  }
};

}  // namespace skewwalk
