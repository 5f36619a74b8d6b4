#pragma once

#include <Eigen/Dense>

#include <vector>

#include "rsearch/marl/mlp.hpp"

namespace rsearch::marl {

// Shared-parameter actor (observation -> action logits; the observation
// carries the agent index) and centralized critic (global state -> value).
struct PolicyParams {
  Mlp actor;
  Mlp critic;

  PolicyParams(int obs_len, int global_len, int hidden1, int hidden2, int n_actions);

  // Orthogonal initialization: sqrt(2) hidden gains, 0.01 on the actor output
  // (near-uniform initial policy), 1.0 on the critic output.
  void init(Rng& rng);

  bool finite() const { return actor.finite() && critic.finite(); }
};

// Columnwise stable log-softmax / softmax over logits (actions x batch).
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits);
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);

// Per-column policy entropy, in [0, ln(actions)].
Eigen::VectorXd policy_entropy(const Eigen::MatrixXd& logits);

struct ActorBatch {
  Eigen::MatrixXd obs;        // obs_len x batch
  std::vector<int> actions;   // batch
  Eigen::VectorXd old_logp;   // batch
  Eigen::VectorXd advantage;  // batch, already normalized
};

// Clipped-surrogate actor loss with entropy bonus:
//   -mean(min(ratio*A, clip(ratio, 1-eps, 1+eps)*A)) - entropy_coef * mean(H)
double actor_loss(const Mlp& actor, const ActorBatch& batch, double clip,
                  double entropy_coef);

// Same loss; also accumulates analytic parameter gradients and reports the
// batch mean entropy.
double actor_loss_grad(const Mlp& actor, const ActorBatch& batch, double clip,
                       double entropy_coef, Mlp::Gradients& grads,
                       double* mean_entropy = nullptr);

// Mean-squared-error value loss.
double critic_loss(const Mlp& critic, const Eigen::MatrixXd& global_state,
                   const Eigen::VectorXd& returns);

double critic_loss_grad(const Mlp& critic, const Eigen::MatrixXd& global_state,
                        const Eigen::VectorXd& returns, Mlp::Gradients& grads);

}  // namespace rsearch::marl
