#include "sfc/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace sfc {

namespace {

DenseLayer zeros_like(const DenseLayer& l) {
  return {Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
          Eigen::VectorXd::Zero(l.bias.size())};
}

}  // namespace

Mlp::Mlp(int input_size, const std::vector<int>& hidden, int output_size, Rng& rng,
         double final_scale) {
  if (input_size < 1 || output_size < 1) throw std::invalid_argument("Mlp: empty input or output");
  std::vector<int> sizes{input_size};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output_size);
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    const int in = sizes[k];
    const int out = sizes[k + 1];
    if (out < 1) throw std::invalid_argument("Mlp: empty hidden layer");
    const bool last = k + 2 == sizes.size();
    const double bound = last ? final_scale : 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> init(-bound, bound);
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) layer.weight(r, c) = init(rng);
    }
    for (int r = 0; r < out; ++r) layer.bias(r) = init(rng);
    layers_.push_back(std::move(layer));
  }
}

std::vector<int> Mlp::hidden_sizes() const {
  std::vector<int> out;
  for (std::size_t k = 0; k + 1 < layers_.size(); ++k) out.push_back(static_cast<int>(layers_[k].weight.rows()));
  return out;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  if (x.rows() != input_size()) throw std::invalid_argument("Mlp::forward: input size mismatch");
  Eigen::MatrixXd h = x;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Eigen::MatrixXd z = layers_[k].weight * h;
    z.colwise() += layers_[k].bias;
    if (k + 1 < layers_.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Tape& tape) const {
  if (x.rows() != input_size()) throw std::invalid_argument("Mlp::forward: input size mismatch");
  tape.inputs.resize(layers_.size());
  tape.pre.resize(layers_.size());
  tape.inputs[0] = x;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    tape.pre[k] = layers_[k].weight * tape.inputs[k];
    tape.pre[k].colwise() += layers_[k].bias;
    if (k + 1 < layers_.size()) tape.inputs[k + 1] = tape.pre[k].cwiseMax(0.0);
  }
  return tape.pre.back();
}

Eigen::MatrixXd Mlp::backward(const Tape& tape, const Eigen::MatrixXd& grad_out,
                              std::vector<DenseLayer>* grads) const {
  if (grads) grads->resize(layers_.size());
  Eigen::MatrixXd delta = grad_out;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    if (k + 1 < layers_.size()) {
      delta = delta.cwiseProduct((tape.pre[k].array() > 0.0).cast<double>().matrix());
    }
    if (grads) {
      (*grads)[k].weight.noalias() = delta * tape.inputs[k].transpose();
      (*grads)[k].bias = delta.rowwise().sum();
    }
    delta = layers_[k].weight.transpose() * delta;
  }
  return delta;
}

void Mlp::soft_update(const Mlp& source, double tau) {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    layers_[k].weight = tau * source.layers_[k].weight + (1.0 - tau) * layers_[k].weight;
    layers_[k].bias = tau * source.layers_[k].bias + (1.0 - tau) * layers_[k].bias;
  }
}

Adam::Adam(const Mlp& net, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const DenseLayer& l : net.layers()) {
    m_.push_back(zeros_like(l));
    v_.push_back(zeros_like(l));
  }
}

void Adam::step(Mlp& net, const std::vector<DenseLayer>& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step = lr_ * std::sqrt(c2) / c1;
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    param.array() -= step * m.array() / (v.array().sqrt() + eps_);
  };
  for (std::size_t k = 0; k < grads.size(); ++k) {
    DenseLayer& p = net.layers()[k];
    update(p.weight, m_[k].weight, v_[k].weight, grads[k].weight);
    update(p.bias, m_[k].bias, v_[k].bias, grads[k].bias);
  }
}

}  // namespace sfc
