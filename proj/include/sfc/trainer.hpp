#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>

#include "sfc/ddpg.hpp"
#include "sfc/env.hpp"

namespace sfc {

/// Per-episode training summary; one row of the training curve.
struct EpisodeRecord {
  int episode = 0;
  std::uint64_t world_seed = 0;
  double total_cost = 0.0;  // summed over steps and followers
  double mean_tracking_error = 0.0;
  bool collided = false;
  int collision_steps = 0;
  double sigma = 0.0;
  double critic_loss = 0.0;      // mean over the episode's updates
  double actor_objective = 0.0;  // mean over the episode's updates

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

/// World seed of training episode `episode`; disjoint in practice from the
/// small consecutive seeds used for evaluation.
std::uint64_t training_world_seed(std::uint64_t seed, int episode);

/// Runs training episodes one at a time: every follower acts through the
/// shared actor, all follower transitions go to one replay buffer, and the
/// learner updates after each environment step once a batch is available.
class Trainer {
 public:
  Trainer(const EnvConfig& env_cfg, const DdpgConfig& ddpg_cfg, std::uint64_t seed, int total_episodes);

  EpisodeRecord run_episode();

  int episodes_done() const { return episodes_done_; }
  int total_episodes() const { return total_episodes_; }
  const DdpgAgent& agent() const { return agent_; }
  const FormationEnv& env() const { return env_; }
  const ReplayBuffer& buffer() const { return buffer_; }

 private:
  FormationEnv env_;
  DdpgAgent agent_;
  ReplayBuffer buffer_;
  Rng rng_;
  std::uint64_t seed_;
  int total_episodes_;
  int episodes_done_ = 0;
};

void write_curve_csv(std::ostream& os, std::span<const EpisodeRecord> rows);

}  // namespace sfc
