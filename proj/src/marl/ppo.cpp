#include "rsearch/marl/ppo.hpp"

#include <algorithm>
#include <cmath>

#include "rsearch/common/errors.hpp"
#include "rsearch/env/sim.hpp"
#include "rsearch/marl/trainer.hpp"

namespace rsearch::marl {

PolicyParams::PolicyParams(int obs_len, int global_len, int hidden1, int hidden2,
                           int n_actions)
    : actor(obs_len, hidden1, hidden2, n_actions),
      critic(global_len, hidden1, hidden2, 1) {}

void PolicyParams::init(Rng& rng) {
  double h = std::sqrt(2.0);
  actor.init_orthogonal(rng, h, 0.01);
  critic.init_orthogonal(rng, h, 1.0);
}

Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  Eigen::RowVectorXd max = logits.colwise().maxCoeff();
  Eigen::MatrixXd shifted = logits.rowwise() - max;
  Eigen::RowVectorXd lse = shifted.array().exp().colwise().sum().log();
  return shifted.rowwise() - lse;
}

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  return log_softmax(logits).array().exp();
}

Eigen::VectorXd policy_entropy(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd logp = log_softmax(logits);
  Eigen::MatrixXd p = logp.array().exp();
  return -(p.array() * logp.array()).colwise().sum();
}

namespace {

// Core of the clipped-surrogate loss; fills dlogits (already divided by the
// batch size) when grads are requested.
double actor_loss_impl(const Mlp& actor, const ActorBatch& batch, double clip,
                       double entropy_coef, Mlp::Gradients* grads,
                       double* mean_entropy) {
  Eigen::Index b = batch.obs.cols();
  Mlp::Cache cache;
  Eigen::MatrixXd logits =
      grads ? actor.forward_cached(batch.obs, cache) : actor.forward(batch.obs);
  Eigen::MatrixXd logp_all = log_softmax(logits);
  Eigen::MatrixXd p = logp_all.array().exp();

  double surrogate = 0.0, entropy_sum = 0.0;
  Eigen::MatrixXd dlogits;
  if (grads) dlogits = Eigen::MatrixXd::Zero(logits.rows(), b);

  for (Eigen::Index s = 0; s < b; ++s) {
    int a = batch.actions[static_cast<std::size_t>(s)];
    double logp = logp_all(a, s);
    double ratio = std::exp(logp - batch.old_logp(s));
    double adv = batch.advantage(s);
    double s1 = ratio * adv;
    double s2 = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
    surrogate += std::min(s1, s2);

    double h = -(p.col(s).array() * logp_all.col(s).array()).sum();
    entropy_sum += h;

    if (grads) {
      // d(-min)/dlogits flows through the unclipped branch only.
      if (s1 <= s2) {
        Eigen::VectorXd dl = p.col(s) * (adv * ratio);
        dl(a) -= adv * ratio;
        dlogits.col(s) = dl;
      }
      // d(-entropy_coef * H)/dlogits = entropy_coef * p .* (logp + H)
      dlogits.col(s) +=
          entropy_coef * (p.col(s).array() * (logp_all.col(s).array() + h)).matrix();
    }
  }

  double n = static_cast<double>(b);
  if (grads) {
    dlogits /= n;
    actor.backward(dlogits, cache, *grads);
  }
  if (mean_entropy) *mean_entropy = entropy_sum / n;
  return -surrogate / n - entropy_coef * entropy_sum / n;
}

}  // namespace

double actor_loss(const Mlp& actor, const ActorBatch& batch, double clip,
                  double entropy_coef) {
  return actor_loss_impl(actor, batch, clip, entropy_coef, nullptr, nullptr);
}

double actor_loss_grad(const Mlp& actor, const ActorBatch& batch, double clip,
                       double entropy_coef, Mlp::Gradients& grads,
                       double* mean_entropy) {
  return actor_loss_impl(actor, batch, clip, entropy_coef, &grads, mean_entropy);
}

double critic_loss(const Mlp& critic, const Eigen::MatrixXd& global_state,
                   const Eigen::VectorXd& returns) {
  Eigen::RowVectorXd v = critic.forward(global_state).row(0);
  return (v.transpose() - returns).squaredNorm() / static_cast<double>(returns.size());
}

double critic_loss_grad(const Mlp& critic, const Eigen::MatrixXd& global_state,
                        const Eigen::VectorXd& returns, Mlp::Gradients& grads) {
  Mlp::Cache cache;
  Eigen::RowVectorXd v = critic.forward_cached(global_state, cache).row(0);
  Eigen::VectorXd diff = v.transpose() - returns;
  double n = static_cast<double>(returns.size());
  Eigen::MatrixXd dout = (2.0 / n) * diff.transpose();
  critic.backward(dout, cache, grads);
  return diff.squaredNorm() / n;
}

UpdateStats ppo_update(PolicyParams& params, const RolloutBuffer& buffer,
                       const TrainConfig& config, Rng& rng, AdamPair& adam) {
  std::size_t steps = buffer.n_steps();
  int agents = buffer.n_agents;
  std::size_t total = steps * static_cast<std::size_t>(agents);
  if (buffer.advantage.size() != steps || buffer.ret.size() != steps)
    throw LengthMismatchError("buffer missing gae results");

  // Advantage normalization over the whole update batch.
  std::vector<double> adv_flat;
  adv_flat.reserve(total);
  for (std::size_t t = 0; t < steps; ++t)
    for (int i = 0; i < agents; ++i) adv_flat.push_back(buffer.advantage[t][i]);
  normalize_advantages(adv_flat);

  int obs_len = static_cast<int>(buffer.obs[0][0].size());
  int gs_len = static_cast<int>(buffer.global_state[0].size());

  std::vector<int> order(total);
  for (std::size_t k = 0; k < total; ++k) order[k] = static_cast<int>(k);

  UpdateStats stats;
  std::size_t mb = static_cast<std::size_t>(config.minibatch);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t begin = 0; begin < total; begin += mb) {
      std::size_t end = std::min(begin + mb, total);
      std::size_t size = end - begin;

      ActorBatch batch;
      batch.obs.resize(obs_len, static_cast<Eigen::Index>(size));
      batch.actions.resize(size);
      batch.old_logp.resize(static_cast<Eigen::Index>(size));
      batch.advantage.resize(static_cast<Eigen::Index>(size));
      Eigen::MatrixXd gs(gs_len, static_cast<Eigen::Index>(size));
      Eigen::VectorXd ret(static_cast<Eigen::Index>(size));

      for (std::size_t k = 0; k < size; ++k) {
        int flat = order[begin + k];
        std::size_t t = static_cast<std::size_t>(flat) / agents;
        int i = flat % agents;
        Eigen::Index col = static_cast<Eigen::Index>(k);
        batch.obs.col(col) = Eigen::Map<const Eigen::VectorXd>(
            buffer.obs[t][i].data(), obs_len);
        batch.actions[k] = buffer.action[t][i];
        batch.old_logp(col) = buffer.logp[t][i];
        batch.advantage(col) = adv_flat[static_cast<std::size_t>(flat)];
        gs.col(col) =
            Eigen::Map<const Eigen::VectorXd>(buffer.global_state[t].data(), gs_len);
        ret(col) = buffer.ret[t][i];
      }

      Mlp::Gradients ag = params.actor.zero_gradients();
      double entropy = 0.0;
      double a_loss = actor_loss_grad(params.actor, batch, config.ppo_clip,
                                      config.entropy_coef, ag, &entropy);
      clip_grad_norm(ag, 0.5);
      params.actor.adam_step(ag, adam.actor, config.actor_lr);

      Mlp::Gradients cg = params.critic.zero_gradients();
      double c_loss = critic_loss_grad(params.critic, gs, ret, cg);
      clip_grad_norm(cg, 0.5);
      params.critic.adam_step(cg, adam.critic, config.critic_lr);

      if (!std::isfinite(a_loss) || !std::isfinite(c_loss))
        throw NonFiniteLossError("ppo losses diverged: actor " +
                                 std::to_string(a_loss) + ", critic " +
                                 std::to_string(c_loss));

      stats.actor_loss += a_loss;
      stats.critic_loss += c_loss;
      stats.entropy += entropy;
      stats.minibatches += 1;
    }
  }
  if (stats.minibatches > 0) {
    stats.actor_loss /= stats.minibatches;
    stats.critic_loss /= stats.minibatches;
    stats.entropy /= stats.minibatches;
  }
  return stats;
}

}  // namespace rsearch::marl
