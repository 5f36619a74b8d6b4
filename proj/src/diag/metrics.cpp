#include "rsearch/diag/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "rsearch/env/sim.hpp"

namespace rsearch::diag {
namespace {

// Pearson correlation of two equal-length streams; 0 when either variance
// vanishes.
double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    mx += x[t];
    my += y[t];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double dx = x[t] - mx, dy = y[t] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Mean pairwise Pearson over agent streams covering steps [begin, end).
double mean_pairwise_pearson(const RolloutTrace& trace, std::size_t begin,
                             std::size_t end) {
  int n = trace.n_agents();
  if (n < 2) return 0.0;
  std::vector<std::vector<double>> streams(n);
  for (std::size_t s = begin; s < end; ++s)
    for (int i = 0; i < n; ++i) streams[i].push_back(trace.steps[s].shaping[i]);
  double total = 0.0;
  int pairs = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      total += pearson(streams[i], streams[j]);
      ++pairs;
    }
  return total / pairs;
}

double entropy(const std::array<double, env::kNumActions>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

// Plug-in NMI over the 6x6 joint histogram of one agent pair's actions
// within [begin, end).
double nmi_over(const RolloutTrace& trace, std::size_t begin, std::size_t end, int i,
                int j) {
  // Counts stay integral until the final division so that degenerate
  // marginals produce an exactly-zero entropy.
  std::array<std::array<double, env::kNumActions>, env::kNumActions> counts{};
  double total = 0.0;
  for (std::size_t s = begin; s < end; ++s) {
    counts[trace.steps[s].actions[i]][trace.steps[s].actions[j]] += 1.0;
    total += 1.0;
  }
  if (total == 0.0) return 0.0;
  std::array<double, env::kNumActions> ca{}, cb{}, pa{}, pb{};
  for (int a = 0; a < env::kNumActions; ++a)
    for (int b = 0; b < env::kNumActions; ++b) {
      ca[a] += counts[a][b];
      cb[b] += counts[a][b];
    }
  for (int a = 0; a < env::kNumActions; ++a) {
    pa[a] = ca[a] / total;
    pb[a] = cb[a] / total;
  }
  double ha = entropy(pa), hb = entropy(pb);
  if (ha == 0.0 || hb == 0.0) return 0.0;
  double mi = 0.0;
  for (int a = 0; a < env::kNumActions; ++a)
    for (int b = 0; b < env::kNumActions; ++b) {
      if (counts[a][b] == 0.0) continue;
      double pab = counts[a][b] / total;
      mi += pab * std::log(pab / (pa[a] * pb[b]));
    }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

double mean_pairwise_nmi(const RolloutTrace& trace, std::size_t begin, std::size_t end) {
  int n = trace.n_agents();
  if (n < 2) return 0.0;
  double total = 0.0;
  int pairs = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      total += nmi_over(trace, begin, end, i, j);
      ++pairs;
    }
  return total / pairs;
}

}  // namespace

void to_json(nlohmann::json& j, const DiagnosticTuple& d) {
  j = nlohmann::json{{"j_hat", d.j_hat},
                     {"delta", d.delta},
                     {"rho", d.rho},
                     {"nmi", d.nmi},
                     {"shaping_returns", d.shaping_returns},
                     {"episode_shaping_returns", d.episode_shaping_returns},
                     {"episode_rho", d.episode_rho},
                     {"episode_nmi", d.episode_nmi},
                     {"rho_pooled", d.rho_pooled}};
}

void from_json(const nlohmann::json& j, DiagnosticTuple& d) {
  j.at("j_hat").get_to(d.j_hat);
  j.at("delta").get_to(d.delta);
  j.at("rho").get_to(d.rho);
  j.at("nmi").get_to(d.nmi);
  j.at("shaping_returns").get_to(d.shaping_returns);
  j.at("episode_shaping_returns").get_to(d.episode_shaping_returns);
  j.at("episode_rho").get_to(d.episode_rho);
  j.at("episode_nmi").get_to(d.episode_nmi);
  j.at("rho_pooled").get_to(d.rho_pooled);
}

std::vector<std::vector<double>> shaping_return(const RolloutTrace& trace, double gamma) {
  std::vector<std::vector<double>> out;
  int n = trace.n_agents();
  for (auto [begin, end] : trace.episode_ranges()) {
    std::vector<double> S(n, 0.0);
    double discount = 1.0;
    for (std::size_t s = begin; s < end; ++s) {
      for (int i = 0; i < n; ++i) S[i] += discount * trace.steps[s].shaping[i];
      discount *= gamma;
    }
    out.push_back(std::move(S));
  }
  return out;
}

double payoff_imbalance(const std::vector<double>& S, double eps) {
  std::size_t n = S.size();
  double pairs = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mass += std::fabs(S[i]);
    for (std::size_t j = i + 1; j < n; ++j) pairs += std::fabs(S[i] - S[j]);
  }
  return pairs / (static_cast<double>(n - 1) * mass + eps);
}

double incentive_alignment(const RolloutTrace& trace) {
  auto ranges = trace.episode_ranges();
  if (ranges.empty()) return 0.0;
  double total = 0.0;
  for (auto [begin, end] : ranges) total += mean_pairwise_pearson(trace, begin, end);
  return total / static_cast<double>(ranges.size());
}

double action_coupling(const RolloutTrace& trace) {
  return mean_pairwise_nmi(trace, 0, trace.steps.size());
}

double discounted_sparse_return(const RolloutTrace& trace, double gamma) {
  auto ranges = trace.episode_ranges();
  if (ranges.empty()) return 0.0;
  double total = 0.0;
  for (auto [begin, end] : ranges) {
    double discount = 1.0;
    for (std::size_t s = begin; s < end; ++s) {
      total += discount * trace.steps[s].sparse;
      discount *= gamma;
    }
  }
  return total / static_cast<double>(ranges.size());
}

DiagnosticTuple diagnose(const RolloutTrace& trace, double j_hat, double gamma,
                         double eps) {
  DiagnosticTuple d;
  d.j_hat = j_hat;
  d.episode_shaping_returns = shaping_return(trace, gamma);

  int n = trace.n_agents();
  d.shaping_returns.assign(n, 0.0);
  for (const auto& S : d.episode_shaping_returns)
    for (int i = 0; i < n; ++i) d.shaping_returns[i] += S[i];
  if (!d.episode_shaping_returns.empty())
    for (double& v : d.shaping_returns)
      v /= static_cast<double>(d.episode_shaping_returns.size());

  d.delta = n >= 2 ? payoff_imbalance(d.shaping_returns, eps) : 0.0;
  d.rho = incentive_alignment(trace);
  d.nmi = action_coupling(trace);

  for (auto [begin, end] : trace.episode_ranges()) {
    d.episode_rho.push_back(mean_pairwise_pearson(trace, begin, end));
    d.episode_nmi.push_back(mean_pairwise_nmi(trace, begin, end));
  }
  d.rho_pooled = mean_pairwise_pearson(trace, 0, trace.steps.size());
  return d;
}

}  // namespace rsearch::diag
