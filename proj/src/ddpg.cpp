#include "sfc/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sfc {

namespace {

constexpr int kActionDim = 3;

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

Eigen::VectorXd to_vector(const Observation& o) {
  return Eigen::Map<const Eigen::VectorXd>(o.data(), static_cast<Eigen::Index>(o.size()));
}

}  // namespace

std::vector<std::string> DdpgConfig::violations() const {
  std::vector<std::string> v;
  if (hidden.empty() || std::any_of(hidden.begin(), hidden.end(), [](int h) { return h < 1; })) {
    v.emplace_back("ddpg.hidden must list positive layer sizes");
  }
  if (!(critic_lr > 0.0)) v.emplace_back("ddpg.critic_lr must be positive");
  if (!(actor_lr > 0.0)) v.emplace_back("ddpg.actor_lr must be positive");
  if (batch_size < 1) v.emplace_back("ddpg.batch_size must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) v.emplace_back("ddpg.gamma must lie in (0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) v.emplace_back("ddpg.tau must lie in (0, 1]");
  if (buffer_capacity < static_cast<std::size_t>(std::max(batch_size, 1))) {
    v.emplace_back("ddpg.buffer_capacity must hold at least one batch");
  }
  if (!(sigma_start >= 0.0 && sigma_end >= 0.0)) v.emplace_back("ddpg exploration sigma must be >= 0");
  if (!(sigma_anneal_fraction >= 0.0 && sigma_anneal_fraction <= 1.0)) {
    v.emplace_back("ddpg.sigma_anneal_fraction must lie in [0, 1]");
  }
  if (updates_per_step < 0) v.emplace_back("ddpg.updates_per_step must be >= 0");
  if (!(reward_scale > 0.0)) v.emplace_back("ddpg.reward_scale must be positive");
  return v;
}

double DdpgConfig::sigma_at(int episode, int total) const {
  const double span = sigma_anneal_fraction * total;
  if (span <= 0.0 || episode >= span) return sigma_end;
  return sigma_start + (sigma_end - sigma_start) * (episode / span);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
  if (items_.empty()) throw std::logic_error("ReplayBuffer: sampling from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

Batch make_batch(const ReplayBuffer& buffer, std::span<const std::size_t> indices) {
  const int n = static_cast<int>(indices.size());
  const int dim = static_cast<int>(buffer.at(indices[0]).obs.size());
  Batch b{Eigen::MatrixXd(dim, n), Eigen::MatrixXd(kActionDim, n), Eigen::RowVectorXd(n),
          Eigen::MatrixXd(dim, n), Eigen::RowVectorXd(n)};
  for (int k = 0; k < n; ++k) {
    const Transition& t = buffer.at(indices[k]);
    b.obs.col(k) = to_vector(t.obs);
    b.next_obs.col(k) = to_vector(t.next_obs);
    for (int a = 0; a < kActionDim; ++a) b.actions(a, k) = t.action[a];
    b.rewards(k) = t.reward;
    b.not_done(k) = t.done ? 0.0 : 1.0;
  }
  return b;
}

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out = logits.rowwise() - logits.colwise().maxCoeff();
  out = out.array().exp().matrix();
  const Eigen::RowVectorXd sums = out.colwise().sum();
  for (Eigen::Index c = 0; c < out.cols(); ++c) out.col(c) /= sums(c);
  return out;
}

RawAction actor_forward(const Mlp& actor, const Observation& obs) {
  if (static_cast<int>(obs.size()) != actor.input_size()) {
    throw std::invalid_argument("actor_forward: observation size mismatch");
  }
  const Eigen::MatrixXd p = softmax(actor.forward(to_vector(obs)));
  return {p(0, 0), p(1, 0), p(2, 0)};
}

double critic_forward(const Mlp& critic, const Observation& obs, const RawAction& u) {
  if (static_cast<int>(obs.size()) + kActionDim != critic.input_size()) {
    throw std::invalid_argument("critic_forward: input size mismatch");
  }
  Eigen::VectorXd x(critic.input_size());
  x.head(obs.size()) = to_vector(obs);
  x.tail(kActionDim) << u[0], u[1], u[2];
  return critic.forward(x)(0, 0);
}

double discounted_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) total = rewards[t] + gamma * total;
  return total;
}

std::vector<RawAction> shared_policy_act(const Mlp& actor, const std::vector<Observation>& observations,
                                         double sigma, Rng& rng) {
  const int n = static_cast<int>(observations.size());
  if (n == 0) return {};
  Eigen::MatrixXd obs(actor.input_size(), n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(observations[i].size()) != actor.input_size()) {
      throw std::invalid_argument("shared_policy_act: observation size mismatch");
    }
    obs.col(i) = to_vector(observations[i]);
  }
  Eigen::MatrixXd logits = actor.forward(obs);
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < kActionDim; ++a) logits(a, i) += noise(rng);
    }
  }
  const Eigen::MatrixXd p = softmax(logits);
  std::vector<RawAction> out(n);
  for (int i = 0; i < n; ++i) out[i] = {p(0, i), p(1, i), p(2, i)};
  return out;
}

double critic_loss(const Mlp& critic, const Mlp& critic_target, const Mlp& actor_target,
                   const Batch& batch, double gamma, double reward_scale,
                   std::vector<DenseLayer>* grads) {
  const Eigen::MatrixXd next_u = softmax(actor_target.forward(batch.next_obs));
  const Eigen::RowVectorXd next_q = critic_target.forward(stack(batch.next_obs, next_u));
  const Eigen::RowVectorXd y =
      reward_scale * batch.rewards + gamma * batch.not_done.cwiseProduct(next_q);

  Mlp::Tape tape;
  const Eigen::RowVectorXd q = critic.forward(stack(batch.obs, batch.actions), tape);
  const Eigen::RowVectorXd td = q - y;
  const double n = static_cast<double>(batch.size());
  if (grads) critic.backward(tape, (2.0 / n) * td, grads);
  return td.squaredNorm() / n;
}

double actor_objective(const Mlp& actor, const Mlp& critic, const Eigen::MatrixXd& obs,
                       std::vector<DenseLayer>* grads) {
  Mlp::Tape actor_tape;
  const Eigen::MatrixXd p = softmax(actor.forward(obs, actor_tape));
  Mlp::Tape critic_tape;
  const Eigen::RowVectorXd q = critic.forward(stack(obs, p), critic_tape);
  const double n = static_cast<double>(obs.cols());
  if (grads) {
    const Eigen::MatrixXd dx =
        critic.backward(critic_tape, Eigen::RowVectorXd::Constant(obs.cols(), 1.0 / n), nullptr);
    const Eigen::MatrixXd dp = dx.bottomRows(kActionDim);
    // Softmax Jacobian: dlogit = p * (dp - <p, dp>).
    const Eigen::RowVectorXd inner = p.cwiseProduct(dp).colwise().sum();
    const Eigen::MatrixXd dlogits = p.cwiseProduct(dp - inner.replicate(kActionDim, 1));
    actor.backward(actor_tape, dlogits, grads);
  }
  return q.sum() / n;
}

DdpgAgent::DdpgAgent(int obs_dim, DdpgConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  if (auto v = cfg_.violations(); !v.empty()) throw std::invalid_argument("invalid ddpg config: " + v.front());
  Rng rng = make_rng(seed, 0x11e7);
  actor_ = Mlp(obs_dim, cfg_.hidden, kActionDim, rng);
  critic_ = Mlp(obs_dim + kActionDim, cfg_.hidden, 1, rng);
  actor_target_ = actor_;
  critic_target_ = critic_;
  actor_opt_ = Adam(actor_, cfg_.actor_lr);
  critic_opt_ = Adam(critic_, cfg_.critic_lr);
}

DdpgAgent::DdpgAgent(DdpgConfig cfg, Mlp actor, Mlp critic, Mlp actor_target, Mlp critic_target,
                     long train_steps)
    : cfg_(std::move(cfg)),
      actor_(std::move(actor)),
      critic_(std::move(critic)),
      actor_target_(std::move(actor_target)),
      critic_target_(std::move(critic_target)),
      actor_opt_(actor_, cfg_.actor_lr),
      critic_opt_(critic_, cfg_.critic_lr),
      train_steps_(train_steps) {
  if (critic_.input_size() != actor_.input_size() + kActionDim || actor_.output_size() != kActionDim ||
      critic_.output_size() != 1) {
    throw std::invalid_argument("DdpgAgent: actor and critic shapes do not fit together");
  }
}

TrainDiagnostics DdpgAgent::train_step(const ReplayBuffer& buffer, Rng& rng) {
  const auto idx = buffer.sample_indices(static_cast<std::size_t>(cfg_.batch_size), rng);
  return train_on_batch(make_batch(buffer, idx));
}

TrainDiagnostics DdpgAgent::train_on_batch(const Batch& batch) {
  TrainDiagnostics d;
  std::vector<DenseLayer> grads;
  d.critic_loss = critic_loss(critic_, critic_target_, actor_target_, batch, cfg_.gamma,
                              cfg_.reward_scale, &grads);
  critic_opt_.step(critic_, grads);
  d.actor_objective = actor_objective(actor_, critic_, batch.obs, &grads);
  actor_opt_.step(actor_, grads);
  critic_target_.soft_update(critic_, cfg_.tau);
  actor_target_.soft_update(actor_, cfg_.tau);
  ++train_steps_;
  return d;
}

std::vector<ControlInput> ActorPolicy::act(const FormationEnv& env) {
  Rng unused;
  const std::vector<RawAction> raw = shared_policy_act(actor_, env.observations(), 0.0, unused);
  std::vector<ControlInput> out;
  for (const RawAction& u : raw) out.push_back(map_action(u, env.config().follower_limits));
  return out;
}

}  // namespace sfc
