#pragma once

#include <json.hpp>

#include <vector>

#include "rsearch/diag/trace.hpp"

namespace rsearch::diag {

inline constexpr double kDefaultEpsilon = 1e-8;

// The per-candidate incentive summary. Delta, rho, and nmi are computed from
// shaping values and actions only; the sparse stream contributes solely to
// j_hat, which is supplied by the caller.
struct DiagnosticTuple {
  double j_hat = 0.0;
  double delta = 0.0;  // payoff imbalance, [0, 1]
  double rho = 0.0;    // incentive alignment, [-1, 1]
  double nmi = 0.0;    // action coupling, [0, 1]
  std::vector<double> shaping_returns;  // mean S_i over episodes

  // Per-episode breakdowns.
  std::vector<std::vector<double>> episode_shaping_returns;
  std::vector<double> episode_rho;
  std::vector<double> episode_nmi;
  double rho_pooled = 0.0;  // single correlation over all steps, for reference

  bool operator==(const DiagnosticTuple&) const = default;
};

void to_json(nlohmann::json& j, const DiagnosticTuple& d);
void from_json(const nlohmann::json& j, DiagnosticTuple& d);

// Discounted shaping return per episode: S_i = sum_t gamma^t * shaping[t][i].
std::vector<std::vector<double>> shaping_return(const RolloutTrace& trace, double gamma);

// Normalized all-pairs difference of per-agent returns:
//   sum_{i<j} |S_i - S_j| / ((n-1) * sum_k |S_k| + eps)
double payoff_imbalance(const std::vector<double>& S, double eps = kDefaultEpsilon);

// Mean pairwise Pearson correlation of per-agent shaping streams, computed
// per episode and averaged. Zero-variance streams contribute 0.
double incentive_alignment(const RolloutTrace& trace);

// Normalized mutual information of the joint action distribution, pooled over
// all steps. Zero marginal entropy yields 0.
double action_coupling(const RolloutTrace& trace);

// Mean discounted sparse return per episode; used to recover J_hat from a
// trace file.
double discounted_sparse_return(const RolloutTrace& trace, double gamma);

// Composes the four diagnostics into the archive-ready record.
DiagnosticTuple diagnose(const RolloutTrace& trace, double j_hat, double gamma,
                         double eps = kDefaultEpsilon);

}  // namespace rsearch::diag
