#pragma once

#include <Eigen/Dense>

#include "rsearch/common/rng.hpp"

namespace rsearch::marl {

// Two-hidden-layer perceptron with rectified-linear activations, implemented
// directly on Eigen matrices with hand-written reverse-mode gradients.
// Columns are samples throughout.
class Mlp {
 public:
  struct Gradients {
    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;

    void set_zero();
    double squared_norm() const;
    void scale(double s);
  };

  struct Cache {
    Eigen::MatrixXd x, a1, a2;  // input and post-activation values
  };

  Mlp(int in, int hidden1, int hidden2, int out);

  // Orthogonal weight init with the given gains; biases zero.
  void init_orthogonal(Rng& rng, double hidden_gain, double out_gain);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd forward1(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd forward_cached(const Eigen::MatrixXd& x, Cache& cache) const;

  // Accumulates parameter gradients for dL/d(output) `dout` (out x batch).
  void backward(const Eigen::MatrixXd& dout, const Cache& cache, Gradients& grads) const;

  Gradients zero_gradients() const;

  int in_dim() const { return static_cast<int>(w1_.cols()); }
  int out_dim() const { return static_cast<int>(w3_.rows()); }

  // Flat parameter view in the fixed order w1, w2, w3, b1, b2, b3
  // (row-major within each matrix); used by finite-difference checks and
  // serialization.
  int n_params() const;
  double get_param(int index) const;
  void set_param(int index, double value);
  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& flat);

  bool finite() const;

  struct AdamState {
    Gradients m, v;
    long long t = 0;
  };
  AdamState zero_adam() const;

  // One Adam step with the given gradients (beta1 0.9, beta2 0.999, eps 1e-8).
  void adam_step(const Gradients& grads, AdamState& state, double lr);

 private:
  template <typename F>
  void for_each_param(F&& f);
  template <typename F>
  void for_each_param(F&& f) const;

  Eigen::MatrixXd w1_, w2_, w3_;
  Eigen::VectorXd b1_, b2_, b3_;
};

// Clips gradients to a maximum global L2 norm; returns the pre-clip norm.
double clip_grad_norm(Mlp::Gradients& grads, double max_norm);

}  // namespace rsearch::marl
