#include "rsearch/marl/gae.hpp"

#include <cmath>

#include "rsearch/common/errors.hpp"

namespace rsearch::marl {

GaeResult compute_gae(const std::vector<double>& rewards,
                      const std::vector<double>& values,
                      const std::vector<std::uint8_t>& dones, double gamma,
                      double lambda) {
  if (rewards.size() != values.size() || rewards.size() != dones.size())
    throw LengthMismatchError("gae inputs differ in length: rewards " +
                              std::to_string(rewards.size()) + ", values " +
                              std::to_string(values.size()) + ", dones " +
                              std::to_string(dones.size()));

  std::size_t n = rewards.size();
  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double carry = 0.0;
  for (std::size_t idx = n; idx-- > 0;) {
    double not_done = dones[idx] ? 0.0 : 1.0;
    double v_next = idx + 1 < n ? values[idx + 1] : 0.0;
    double delta = rewards[idx] + gamma * v_next * not_done - values[idx];
    carry = delta + gamma * lambda * not_done * carry;
    out.advantages[idx] = carry;
    out.returns[idx] = carry + values[idx];
  }
  return out;
}

void normalize_advantages(std::vector<double>& advantages) {
  if (advantages.empty()) return;
  double n = static_cast<double>(advantages.size());
  double mean = 0.0;
  for (double a : advantages) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  double std = std::sqrt(var / n);
  if (std < 1e-8) std = 1e-8;
  for (double& a : advantages) a = (a - mean) / std;
}

}  // namespace rsearch::marl
