#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rsearch/diag/trace.hpp"
#include "rsearch/dsl/program.hpp"
#include "rsearch/env/sim.hpp"
#include "rsearch/marl/gae.hpp"
#include "rsearch/marl/ppo.hpp"

namespace rsearch::marl {

struct TrainConfig {
  double actor_lr = 5e-4;
  double critic_lr = 1e-3;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double ppo_clip = 0.2;
  double entropy_coef = 0.01;
  int minibatch = 256;
  int epochs = 10;
  int hidden1 = 64;
  int hidden2 = 64;
  int iterations = 21;
  int episodes_per_iteration = 8;
  double shaping_scale = 0.1;  // lambda in the augmented reward
  std::uint64_t seed = 0;
  int eval_episodes = 20;

  long long budget_env_steps(int horizon) const {
    return static_cast<long long>(iterations) * episodes_per_iteration * horizon;
  }
};

// One training iteration's worth of on-policy experience.
struct RolloutBuffer {
  int n_agents = 0;
  // Per step.
  std::vector<std::vector<double>> global_state;
  std::vector<double> sparse;
  std::vector<std::uint8_t> done;
  std::vector<double> value;  // centralized critic estimate, shared by agents
  std::vector<env::FeatureVector> features;
  // Per step, per agent ([t][i]).
  std::vector<std::vector<std::vector<double>>> obs;
  std::vector<std::vector<int>> action;
  std::vector<std::vector<double>> logp;
  std::vector<std::vector<double>> shaping;     // r^(p)
  std::vector<std::vector<double>> reward_aug;  // r~ = sparse + lambda * r^(p)
  // Filled by attach_gae.
  std::vector<std::vector<double>> advantage;
  std::vector<std::vector<double>> ret;

  std::size_t n_steps() const { return sparse.size(); }
};

// Runs per-agent GAE over the buffer's augmented rewards against the shared
// critic values and stores raw advantages and returns.
void attach_gae(RolloutBuffer& buffer, double gamma, double lambda);

struct UpdateStats {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  int minibatches = 0;
};

struct AdamPair {
  Mlp::AdamState actor;
  Mlp::AdamState critic;
};

// `epochs` passes of shuffled minibatch updates over the buffer. Advantages
// are normalized across the whole batch first. Throws NonFiniteLossError if
// either loss stops being finite.
UpdateStats ppo_update(PolicyParams& params, const RolloutBuffer& buffer,
                       const TrainConfig& config, Rng& rng, AdamPair& adam);

struct IterationStats {
  int iteration = 0;
  double sparse_return_mean = 0.0;  // undiscounted, over the collected episodes
  double deliveries_mean = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  long long cumulative_env_steps = 0;
};

struct TrainResult {
  PolicyParams params;
  std::vector<IterationStats> curve;
  long long env_steps = 0;
};

struct TrainHooks {
  // Observes each iteration's buffer after GAE, before the update.
  std::function<void(const RolloutBuffer&, int iteration)> on_buffer;
};

// Trains MAPPO from scratch under the fixed budget. Absent program = sparse
// baseline; with a program, rewards are augmented per-agent by
// lambda * r^(p). Seed-deterministic.
TrainResult train_candidate(const env::Layout& layout,
                            const std::optional<dsl::CompiledProgram>& program,
                            const TrainConfig& config, const TrainHooks& hooks = {});

struct EvalResult {
  double j_hat = 0.0;           // mean discounted sparse return
  double j_std = 0.0;           // std of per-episode discounted returns
  double j_undiscounted = 0.0;  // mean raw sparse return, for reporting
  double deliveries_mean = 0.0;
  double invalid_deliveries_mean = 0.0;
  diag::RolloutTrace trace;  // all evaluation episodes, episode-delimited
};

// Greedy evaluation (argmax logits, ties to the lowest action index) on the
// sparse objective only. A program, when provided, is evaluated purely for
// trace logging and never contributes to j_hat. The seed is accepted for
// interface stability; greedy evaluation in this deterministic environment
// does not consume randomness.
EvalResult evaluate_sparse(const PolicyParams& params, const env::Layout& layout,
                           int episodes, std::uint64_t seed,
                           const std::optional<dsl::CompiledProgram>& program = {},
                           double gamma = 0.99);

}  // namespace rsearch::marl
