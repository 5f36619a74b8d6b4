#pragma once

#include <cstdint>
#include <vector>

namespace rsearch::marl {

struct GaeResult {
  std::vector<double> advantages;  // raw, not normalized
  std::vector<double> returns;     // advantages + values
};

// Generalized advantage estimation over one reward stream:
//   delta_t = r_t + gamma * v_{t+1} * (1 - done_t) - v_t
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// The value beyond the final step bootstraps as 0. Throws LengthMismatchError
// on inconsistent inputs.
GaeResult compute_gae(const std::vector<double>& rewards,
                      const std::vector<double>& values,
                      const std::vector<std::uint8_t>& dones, double gamma,
                      double lambda);

// In-place batch normalization to mean 0 / std 1 with a std floor of 1e-8.
void normalize_advantages(std::vector<double>& advantages);

}  // namespace rsearch::marl
