#include "sfc/trainer.hpp"

#include <iomanip>
#include <ostream>

namespace sfc {

std::uint64_t training_world_seed(std::uint64_t seed, int episode) {
  // splitmix64 finalizer over (seed, episode).
  std::uint64_t z = seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(episode) + 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Trainer::Trainer(const EnvConfig& env_cfg, const DdpgConfig& ddpg_cfg, std::uint64_t seed,
                 int total_episodes)
    : env_(env_cfg),
      agent_(env_.observation_size(), ddpg_cfg, seed),
      buffer_(ddpg_cfg.buffer_capacity),
      rng_(make_rng(seed, 0x7a1e)),
      seed_(seed),
      total_episodes_(total_episodes) {}

EpisodeRecord Trainer::run_episode() {
  const DdpgConfig& cfg = agent_.config();
  EpisodeRecord rec;
  rec.episode = episodes_done_;
  rec.world_seed = training_world_seed(seed_, episodes_done_);
  rec.sigma = cfg.sigma_at(episodes_done_, total_episodes_);

  std::vector<Observation> obs = env_.reset(rec.world_seed);
  const MotionLimits& limits = env_.config().follower_limits;
  double error_sum = 0.0;
  int steps = 0;
  int updates = 0;

  for (bool done = false; !done;) {
    const std::vector<RawAction> raw = shared_policy_act(agent_.actor(), obs, rec.sigma, rng_);
    std::vector<ControlInput> controls;
    for (const RawAction& u : raw) controls.push_back(map_action(u, limits));

    StepResult res = env_.step(controls);
    done = res.done;
    ++steps;
    for (int i = 0; i < env_.n_followers(); ++i) {
      const FollowerStep& f = res.followers[i];
      rec.total_cost += f.reward;
      error_sum += f.true_error.norm();
      buffer_.push({obs[i], raw[i], f.reward, res.observations[i], done});
    }
    if (res.any_collision) {
      rec.collided = true;
      ++rec.collision_steps;
    }
    obs = std::move(res.observations);

    if (buffer_.size() >= static_cast<std::size_t>(cfg.batch_size)) {
      for (int k = 0; k < cfg.updates_per_step; ++k) {
        const TrainDiagnostics d = agent_.train_step(buffer_, rng_);
        rec.critic_loss += d.critic_loss;
        rec.actor_objective += d.actor_objective;
        ++updates;
      }
    }
  }
  if (updates > 0) {
    rec.critic_loss /= updates;
    rec.actor_objective /= updates;
  }
  rec.mean_tracking_error = error_sum / (static_cast<double>(steps) * env_.n_followers());
  ++episodes_done_;
  return rec;
}

void write_curve_csv(std::ostream& os, std::span<const EpisodeRecord> rows) {
  os << "episode,world_seed,total_cost,mean_tracking_error,collided,collision_steps,sigma,"
        "critic_loss,actor_objective\n";
  os << std::setprecision(17);
  for (const EpisodeRecord& r : rows) {
    os << r.episode << ',' << r.world_seed << ',' << r.total_cost << ',' << r.mean_tracking_error << ','
       << (r.collided ? 1 : 0) << ',' << r.collision_steps << ',' << r.sigma << ',' << r.critic_loss
       << ',' << r.actor_objective << '\n';
  }
}

}  // namespace sfc
