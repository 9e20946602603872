#pragma once

#include <vector>

#include <Eigen/Core>

#include "sfc/dynamics.hpp"

namespace sfc {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.weight.rows() == b.weight.rows() && a.weight.cols() == b.weight.cols() &&
           a.weight == b.weight && a.bias == b.bias;
  }
};

/// Fully connected network with ReLU hidden layers and a linear output.
/// Batches are column-major: one sample per column.
class Mlp {
 public:
  /// Activations recorded by a forward pass for the backward pass.
  struct Tape {
    std::vector<Eigen::MatrixXd> inputs;  // input of each layer
    std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  };

  Mlp() = default;
  /// Hidden layers use U(-1/sqrt(fan_in), 1/sqrt(fan_in)); the output layer
  /// uses U(-final_scale, final_scale).
  Mlp(int input_size, const std::vector<int>& hidden, int output_size, Rng& rng,
      double final_scale = 3e-3);

  int input_size() const { return static_cast<int>(layers_.front().weight.cols()); }
  int output_size() const { return static_cast<int>(layers_.back().weight.rows()); }
  std::vector<int> hidden_sizes() const;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Tape& tape) const;

  /// Back-propagates dL/dy. Gradients are written to `grads` (same shapes as
  /// the layers) when non-null; returns dL/dx.
  Eigen::MatrixXd backward(const Tape& tape, const Eigen::MatrixXd& grad_out,
                           std::vector<DenseLayer>* grads) const;

  /// this <- tau * source + (1 - tau) * this.
  void soft_update(const Mlp& source, double tau);

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<DenseLayer> layers_;
};

/// Adam over the parameters of one Mlp.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(Mlp& net, const std::vector<DenseLayer>& grads);
  double learning_rate() const { return lr_; }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  std::vector<DenseLayer> m_;
  std::vector<DenseLayer> v_;
};

}  // namespace sfc
