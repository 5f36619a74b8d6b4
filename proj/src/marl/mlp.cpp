#include "rsearch/marl/mlp.hpp"

#include <cmath>

namespace rsearch::marl {
namespace {

Eigen::MatrixXd gaussian(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

// Orthogonal (semi-orthogonal for non-square) matrix from a QR decomposition
// of a Gaussian draw, sign-fixed by the diagonal of R.
Eigen::MatrixXd orthogonal(int rows, int cols, double gain, Rng& rng) {
  bool wide = cols > rows;
  int big = wide ? cols : rows, small = wide ? rows : cols;
  Eigen::MatrixXd a = gaussian(big, small, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (int c = 0; c < small; ++c)
    if (r(c, c) < 0) q.col(c) = -q.col(c);
  Eigen::MatrixXd w = wide ? Eigen::MatrixXd(q.transpose()) : q;
  return gain * w;
}

}  // namespace

void Mlp::Gradients::set_zero() {
  w1.setZero();
  w2.setZero();
  w3.setZero();
  b1.setZero();
  b2.setZero();
  b3.setZero();
}

double Mlp::Gradients::squared_norm() const {
  return w1.squaredNorm() + w2.squaredNorm() + w3.squaredNorm() + b1.squaredNorm() +
         b2.squaredNorm() + b3.squaredNorm();
}

void Mlp::Gradients::scale(double s) {
  w1 *= s;
  w2 *= s;
  w3 *= s;
  b1 *= s;
  b2 *= s;
  b3 *= s;
}

Mlp::Mlp(int in, int hidden1, int hidden2, int out)
    : w1_(Eigen::MatrixXd::Zero(hidden1, in)),
      w2_(Eigen::MatrixXd::Zero(hidden2, hidden1)),
      w3_(Eigen::MatrixXd::Zero(out, hidden2)),
      b1_(Eigen::VectorXd::Zero(hidden1)),
      b2_(Eigen::VectorXd::Zero(hidden2)),
      b3_(Eigen::VectorXd::Zero(out)) {}

void Mlp::init_orthogonal(Rng& rng, double hidden_gain, double out_gain) {
  w1_ = orthogonal(static_cast<int>(w1_.rows()), static_cast<int>(w1_.cols()),
                   hidden_gain, rng);
  w2_ = orthogonal(static_cast<int>(w2_.rows()), static_cast<int>(w2_.cols()),
                   hidden_gain, rng);
  w3_ = orthogonal(static_cast<int>(w3_.rows()), static_cast<int>(w3_.cols()), out_gain,
                   rng);
  b1_.setZero();
  b2_.setZero();
  b3_.setZero();
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd a1 = ((w1_ * x).colwise() + b1_).cwiseMax(0.0);
  Eigen::MatrixXd a2 = ((w2_ * a1).colwise() + b2_).cwiseMax(0.0);
  return (w3_ * a2).colwise() + b3_;
}

Eigen::VectorXd Mlp::forward1(const Eigen::VectorXd& x) const {
  return forward(Eigen::MatrixXd(x)).col(0);
}

Eigen::MatrixXd Mlp::forward_cached(const Eigen::MatrixXd& x, Cache& cache) const {
  cache.x = x;
  cache.a1 = ((w1_ * x).colwise() + b1_).cwiseMax(0.0);
  cache.a2 = ((w2_ * cache.a1).colwise() + b2_).cwiseMax(0.0);
  return (w3_ * cache.a2).colwise() + b3_;
}

void Mlp::backward(const Eigen::MatrixXd& dout, const Cache& cache,
                   Gradients& grads) const {
  grads.w3 += dout * cache.a2.transpose();
  grads.b3 += dout.rowwise().sum();
  Eigen::MatrixXd dz2 =
      (w3_.transpose() * dout).cwiseProduct((cache.a2.array() > 0.0).cast<double>().matrix());
  grads.w2 += dz2 * cache.a1.transpose();
  grads.b2 += dz2.rowwise().sum();
  Eigen::MatrixXd dz1 =
      (w2_.transpose() * dz2).cwiseProduct((cache.a1.array() > 0.0).cast<double>().matrix());
  grads.w1 += dz1 * cache.x.transpose();
  grads.b1 += dz1.rowwise().sum();
}

Mlp::Gradients Mlp::zero_gradients() const {
  Gradients g;
  g.w1 = Eigen::MatrixXd::Zero(w1_.rows(), w1_.cols());
  g.w2 = Eigen::MatrixXd::Zero(w2_.rows(), w2_.cols());
  g.w3 = Eigen::MatrixXd::Zero(w3_.rows(), w3_.cols());
  g.b1 = Eigen::VectorXd::Zero(b1_.size());
  g.b2 = Eigen::VectorXd::Zero(b2_.size());
  g.b3 = Eigen::VectorXd::Zero(b3_.size());
  return g;
}

template <typename F>
void Mlp::for_each_param(F&& f) {
  for (auto* m : {&w1_, &w2_, &w3_})
    for (int r = 0; r < m->rows(); ++r)
      for (int c = 0; c < m->cols(); ++c) f((*m)(r, c));
  for (auto* v : {&b1_, &b2_, &b3_})
    for (int i = 0; i < v->size(); ++i) f((*v)(i));
}

template <typename F>
void Mlp::for_each_param(F&& f) const {
  for (const auto* m : {&w1_, &w2_, &w3_})
    for (int r = 0; r < m->rows(); ++r)
      for (int c = 0; c < m->cols(); ++c) f((*m)(r, c));
  for (const auto* v : {&b1_, &b2_, &b3_})
    for (int i = 0; i < v->size(); ++i) f((*v)(i));
}

int Mlp::n_params() const {
  return static_cast<int>(w1_.size() + w2_.size() + w3_.size() + b1_.size() + b2_.size() +
                          b3_.size());
}

double Mlp::get_param(int index) const {
  double out = 0.0;
  int i = 0;
  for_each_param([&](const double& p) {
    if (i++ == index) out = p;
  });
  return out;
}

void Mlp::set_param(int index, double value) {
  int i = 0;
  for_each_param([&](double& p) {
    if (i++ == index) p = value;
  });
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> flat;
  flat.reserve(n_params());
  for_each_param([&](const double& p) { flat.push_back(p); });
  return flat;
}

void Mlp::unflatten(const std::vector<double>& flat) {
  std::size_t i = 0;
  for_each_param([&](double& p) { p = flat.at(i++); });
}

bool Mlp::finite() const {
  bool ok = true;
  for_each_param([&](const double& p) { ok = ok && std::isfinite(p); });
  return ok;
}

Mlp::AdamState Mlp::zero_adam() const {
  AdamState s;
  s.m = zero_gradients();
  s.v = zero_gradients();
  return s;
}

void Mlp::adam_step(const Gradients& grads, AdamState& state, double lr) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  state.t += 1;
  double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
  double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v.array() = kBeta2 * v.array() + (1.0 - kBeta2) * g.array().square();
    param.array() -=
        lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  };
  update(w1_, state.m.w1, state.v.w1, grads.w1);
  update(w2_, state.m.w2, state.v.w2, grads.w2);
  update(w3_, state.m.w3, state.v.w3, grads.w3);
  update(b1_, state.m.b1, state.v.b1, grads.b1);
  update(b2_, state.m.b2, state.v.b2, grads.b2);
  update(b3_, state.m.b3, state.v.b3, grads.b3);
}

double clip_grad_norm(Mlp::Gradients& grads, double max_norm) {
  double norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm && norm > 0.0) grads.scale(max_norm / norm);
  return norm;
}

}  // namespace rsearch::marl
