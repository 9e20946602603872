#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sfc/action.hpp"
#include "sfc/env.hpp"
#include "sfc/mlp.hpp"
#include "sfc/policy.hpp"

namespace sfc {

struct DdpgConfig {
  std::vector<int> hidden{64, 128, 128};
  double critic_lr = 1e-3;
  double actor_lr = 1e-4;
  int batch_size = 1024;
  double gamma = 0.99;
  double tau = 0.005;
  std::size_t buffer_capacity = 1'000'000;
  double sigma_start = 0.3;
  double sigma_end = 0.05;
  double sigma_anneal_fraction = 0.5;  // of the training episodes
  int updates_per_step = 1;
  /// Multiplies rewards before they enter the critic targets.
  double reward_scale = 1.0;

  std::vector<std::string> violations() const;
  /// Exploration noise for `episode` of `total` (linear anneal, then flat).
  double sigma_at(int episode, int total) const;
};

struct Transition {
  Observation obs;
  RawAction action{};
  double reward = 0.0;
  Observation next_obs;
  bool done = false;
};

/// Fixed-capacity FIFO of transitions with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Storage slot `i` (not insertion order once the buffer has wrapped).
  const Transition& at(std::size_t i) const { return items_[i]; }
  /// Oldest transition still stored.
  const Transition& oldest() const { return items_[items_.size() < capacity_ ? 0 : next_]; }

  /// `n` slots drawn uniformly with replacement.
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

/// Column-major training batch.
struct Batch {
  Eigen::MatrixXd obs;       // obs_dim x B
  Eigen::MatrixXd actions;   // 3 x B
  Eigen::RowVectorXd rewards;
  Eigen::MatrixXd next_obs;  // obs_dim x B
  Eigen::RowVectorXd not_done;

  int size() const { return static_cast<int>(obs.cols()); }
};

Batch make_batch(const ReplayBuffer& buffer, std::span<const std::size_t> indices);

/// Column-wise softmax of logits.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);

RawAction actor_forward(const Mlp& actor, const Observation& obs);
double critic_forward(const Mlp& critic, const Observation& obs, const RawAction& u);

/// sum_t gamma^t * r_t.
double discounted_return(std::span<const double> rewards, double gamma);

/// The same actor evaluates every follower; Gaussian noise of std `sigma` is
/// added to the logits before the softmax.
std::vector<RawAction> shared_policy_act(const Mlp& actor, const std::vector<Observation>& observations,
                                         double sigma, Rng& rng);

/// Mean squared TD error against y = s*r + gamma * (1 - done) * Q'(o', mu'(o')).
/// Writes critic parameter gradients when `grads` is non-null.
double critic_loss(const Mlp& critic, const Mlp& critic_target, const Mlp& actor_target,
                   const Batch& batch, double gamma, double reward_scale,
                   std::vector<DenseLayer>* grads);

/// Mean Q(o, mu(o)) over the batch (a cost, minimized by the actor). Writes
/// actor parameter gradients when `grads` is non-null.
double actor_objective(const Mlp& actor, const Mlp& critic, const Eigen::MatrixXd& obs,
                       std::vector<DenseLayer>* grads);

struct TrainDiagnostics {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
};

/// Deterministic actor-critic learner with target networks.
class DdpgAgent {
 public:
  DdpgAgent(int obs_dim, DdpgConfig cfg, std::uint64_t seed);
  /// Rebuilds an agent around existing networks (e.g. from a checkpoint).
  DdpgAgent(DdpgConfig cfg, Mlp actor, Mlp critic, Mlp actor_target, Mlp critic_target,
            long train_steps);

  const DdpgConfig& config() const { return cfg_; }
  int obs_dim() const { return actor_.input_size(); }

  TrainDiagnostics train_step(const ReplayBuffer& buffer, Rng& rng);
  TrainDiagnostics train_on_batch(const Batch& batch);

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& actor_target() const { return actor_target_; }
  const Mlp& critic_target() const { return critic_target_; }
  Mlp& mutable_actor() { return actor_; }
  Mlp& mutable_critic() { return critic_; }
  long train_steps() const { return train_steps_; }

 private:
  DdpgConfig cfg_;
  Mlp actor_;
  Mlp critic_;
  Mlp actor_target_;
  Mlp critic_target_;
  Adam actor_opt_;
  Adam critic_opt_;
  long train_steps_ = 0;
};

/// Noiseless deployment of a trained actor on every follower.
class ActorPolicy final : public FollowerPolicy {
 public:
  explicit ActorPolicy(Mlp actor, std::string name = "learned")
      : actor_(std::move(actor)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  std::vector<ControlInput> act(const FormationEnv& env) override;
  std::unique_ptr<FollowerPolicy> clone() const override {
    return std::make_unique<ActorPolicy>(*this);
  }

 private:
  Mlp actor_;
  std::string name_;
};

}  // namespace sfc
