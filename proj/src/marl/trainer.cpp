#include "rsearch/marl/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "rsearch/common/errors.hpp"

namespace rsearch::marl {
namespace {

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

int argmax_lowest(const Eigen::VectorXd& logits) {
  int best = 0;
  for (int k = 1; k < logits.size(); ++k)
    if (logits(k) > logits(best)) best = k;
  return best;
}

// Collects full episodes with the current stochastic policy. Values are
// filled in one batched critic pass afterwards.
void collect_iteration(const env::Layout& layout,
                       const std::optional<dsl::CompiledProgram>& program,
                       const TrainConfig& config, PolicyParams& params, Rng& rng,
                       RolloutBuffer& buffer, long long& env_steps) {
  int n = layout.n_agents();
  buffer = RolloutBuffer{};
  buffer.n_agents = n;

  for (int episode = 0; episode < config.episodes_per_iteration; ++episode) {
    env::EnvState state = env::reset(layout);
    bool done = false;
    while (!done) {
      Eigen::MatrixXd obs_mat(layout.observation_length(), n);
      std::vector<std::vector<double>> obs(n);
      for (int i = 0; i < n; ++i) {
        obs[i] = env::observe(layout, state, i);
        obs_mat.col(i) = to_eigen(obs[i]);
      }
      Eigen::MatrixXd logp_all = log_softmax(params.actor.forward(obs_mat));

      std::vector<env::Action> actions(n);
      std::vector<int> action_idx(n);
      std::vector<double> logp(n);
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd p = logp_all.col(i).array().exp();
        std::vector<double> probs(p.data(), p.data() + p.size());
        int a = rng.categorical(probs);
        action_idx[i] = a;
        logp[i] = logp_all(a, i);
        actions[i] = env::action_from_index(a);
      }

      env::StepOutcome out = env::step(layout, state, actions);
      env_steps += 1;

      std::vector<double> shaping(n, 0.0);
      if (program) shaping = dsl::evaluate(*program, out.features, out.sparse_reward);
      std::vector<double> aug(n);
      for (int i = 0; i < n; ++i)
        aug[i] = out.sparse_reward + config.shaping_scale * shaping[i];

      buffer.global_state.push_back(env::global_state(layout, state));
      buffer.sparse.push_back(out.sparse_reward);
      buffer.done.push_back(out.done ? 1 : 0);
      buffer.features.push_back(out.features);
      buffer.obs.push_back(std::move(obs));
      buffer.action.push_back(action_idx);
      buffer.logp.push_back(logp);
      buffer.shaping.push_back(shaping);
      buffer.reward_aug.push_back(aug);

      state = out.next_state;
      done = out.done;
    }
  }

  std::size_t steps = buffer.n_steps();
  Eigen::MatrixXd gs(layout.global_state_length(), static_cast<Eigen::Index>(steps));
  for (std::size_t t = 0; t < steps; ++t) gs.col(static_cast<Eigen::Index>(t)) =
      to_eigen(buffer.global_state[t]);
  Eigen::RowVectorXd values = params.critic.forward(gs).row(0);
  buffer.value.assign(values.data(), values.data() + values.size());
}

}  // namespace

void attach_gae(RolloutBuffer& buffer, double gamma, double lambda) {
  std::size_t steps = buffer.n_steps();
  int n = buffer.n_agents;
  buffer.advantage.assign(steps, std::vector<double>(n, 0.0));
  buffer.ret.assign(steps, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    std::vector<double> rewards(steps);
    for (std::size_t t = 0; t < steps; ++t) rewards[t] = buffer.reward_aug[t][i];
    GaeResult gae = compute_gae(rewards, buffer.value, buffer.done, gamma, lambda);
    for (std::size_t t = 0; t < steps; ++t) {
      buffer.advantage[t][i] = gae.advantages[t];
      buffer.ret[t][i] = gae.returns[t];
    }
  }
}

TrainResult train_candidate(const env::Layout& layout,
                            const std::optional<dsl::CompiledProgram>& program,
                            const TrainConfig& config, const TrainHooks& hooks) {
  Rng rng(config.seed);
  PolicyParams params(layout.observation_length(), layout.global_state_length(),
                      config.hidden1, config.hidden2, env::kNumActions);
  params.init(rng);
  AdamPair adam{params.actor.zero_adam(), params.critic.zero_adam()};

  TrainResult result{std::move(params), {}, 0};

  for (int iteration = 0; iteration < config.iterations; ++iteration) {
    RolloutBuffer buffer;
    collect_iteration(layout, program, config, result.params, rng, buffer,
                      result.env_steps);
    attach_gae(buffer, config.gamma, config.gae_lambda);
    if (hooks.on_buffer) hooks.on_buffer(buffer, iteration);

    UpdateStats update = ppo_update(result.params, buffer, config, rng, adam);
    if (!result.params.finite())
      throw NonFiniteLossError("policy parameters diverged at iteration " +
                               std::to_string(iteration));

    IterationStats it;
    it.iteration = iteration;
    double episode_return = 0.0, total_return = 0.0, episodes = 0.0;
    for (std::size_t t = 0; t < buffer.n_steps(); ++t) {
      episode_return += buffer.sparse[t];
      if (buffer.done[t]) {
        total_return += episode_return;
        episode_return = 0.0;
        episodes += 1.0;
      }
    }
    it.sparse_return_mean = episodes > 0 ? total_return / episodes : 0.0;
    it.deliveries_mean = it.sparse_return_mean / env::kDeliveryReward;
    it.actor_loss = update.actor_loss;
    it.critic_loss = update.critic_loss;
    it.entropy = update.entropy;
    it.cumulative_env_steps = result.env_steps;
    result.curve.push_back(it);
  }
  return result;
}

EvalResult evaluate_sparse(const PolicyParams& params, const env::Layout& layout,
                           int episodes, std::uint64_t seed,
                           const std::optional<dsl::CompiledProgram>& program,
                           double gamma) {
  (void)seed;
  int n = layout.n_agents();
  EvalResult result;
  std::vector<double> discounted, undiscounted;

  for (int episode = 0; episode < episodes; ++episode) {
    env::EnvState state = env::reset(layout);
    bool done = false;
    double disc = 0.0, flat = 0.0, factor = 1.0;
    double invalid = 0.0;
    int t = 0;
    while (!done) {
      Eigen::MatrixXd obs_mat(layout.observation_length(), n);
      for (int i = 0; i < n; ++i)
        obs_mat.col(i) = to_eigen(env::observe(layout, state, i));
      Eigen::MatrixXd logits = params.actor.forward(obs_mat);

      std::vector<env::Action> actions(n);
      std::vector<int> action_idx(n);
      for (int i = 0; i < n; ++i) {
        action_idx[i] = argmax_lowest(logits.col(i));
        actions[i] = env::action_from_index(action_idx[i]);
      }

      env::StepOutcome out = env::step(layout, state, actions);
      std::vector<double> shaping(n, 0.0);
      if (program) shaping = dsl::evaluate(*program, out.features, out.sparse_reward);

      diag::TraceStep step;
      step.episode = episode;
      step.t = t;
      step.shaping = shaping;
      step.actions = action_idx;
      step.sparse = out.sparse_reward;
      result.trace.steps.push_back(std::move(step));

      disc += factor * out.sparse_reward;
      flat += out.sparse_reward;
      factor *= gamma;
      for (int i = 0; i < n; ++i) invalid += out.features.get("invalid_delivery", i);

      state = out.next_state;
      done = out.done;
      ++t;
    }
    discounted.push_back(disc);
    undiscounted.push_back(flat);
    result.deliveries_mean += static_cast<double>(state.deliveries);
    result.invalid_deliveries_mean += invalid;
  }

  double m = static_cast<double>(episodes);
  for (double d : discounted) result.j_hat += d;
  result.j_hat /= m;
  for (double u : undiscounted) result.j_undiscounted += u;
  result.j_undiscounted /= m;
  double var = 0.0;
  for (double d : discounted) var += (d - result.j_hat) * (d - result.j_hat);
  result.j_std = std::sqrt(var / m);
  result.deliveries_mean /= m;
  result.invalid_deliveries_mean /= m;
  return result;
}

}  // namespace rsearch::marl
