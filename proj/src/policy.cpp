#include "sfc/policy.hpp"

#include <algorithm>
#include <cmath>

#include "sfc/action.hpp"

namespace sfc {

std::vector<ControlInput> StandStillPolicy::act(const FormationEnv& env) {
  const double dt = env.config().dt;
  std::vector<ControlInput> out;
  for (int i = 1; i <= env.n_followers(); ++i) {
    const AgentState& s = env.world().agents[i];
    out.push_back({-s.speed / dt, -s.turn_rate / dt});
  }
  return out;
}

ControlInput FormationTrackerPolicy::control(const FormationEnv& env, int agent) const {
  const WorldState& w = env.world();
  const MotionLimits& lim = env.config().follower_limits;
  const AgentState& nav = w.agents[0];
  const AgentState& me = w.agents[agent];

  const Vec2 nav_velocity{nav.speed * std::cos(nav.heading.value()),
                          nav.speed * std::sin(nav.heading.value())};
  const Vec2 error = me.position - nav.position - env.formation().offsets[agent - 1];
  const Vec2 desired = nav_velocity - gains_.position * error;

  const double desired_heading =
      desired.norm() > 1e-9 ? std::atan2(desired.y, desired.x) : me.heading.value();
  const double heading_error = wrap_angle(desired_heading - me.heading.value());
  double speed = std::min(desired.norm(), lim.max_speed) * std::max(0.0, std::cos(heading_error));
  double turn = gains_.heading * heading_error;

  if (gains_.stream > 0.0) {
    const AvoidanceUpdate& det = w.detections[agent];
    double stream_error = 0.0;
    const SideReport* nearest = nullptr;
    for (const SideReport& s : det.sides) {
      if (!s.avoiding) continue;
      if (nearest == nullptr || s.shortest_distance < nearest->shortest_distance) nearest = &s;
      stream_error += s.c_current - s.c_desired;
    }
    if (nearest != nullptr) {
      // Head along the local flow past the nearest cylinder, corrected toward
      // the desired stream values (turning right lowers them).
      const Circle& c = nearest->cylinder;
      const double x = -c.center.x, y = -c.center.y;
      const double rho2 = x * x + y * y, r2 = c.radius * c.radius;
      const double u = 1.0 - r2 * (x * x - y * y) / (rho2 * rho2);
      const double v = -2.0 * r2 * x * y / (rho2 * rho2);
      const double command = std::clamp(std::atan2(v, u) - gains_.stream * stream_error, -kPi / 2, kPi / 2);
      turn = gains_.heading * command;
      // Keeps the turning radius below the obstacle range.
      speed = std::min(gains_.avoid_speed, gains_.approach * nearest->shortest_distance);
    }
  }

  turn = std::clamp(turn, -lim.max_turn_rate, lim.max_turn_rate);
  return clamp_controls({gains_.speed * (speed - me.speed), gains_.turn_rate * (turn - me.turn_rate)},
                        lim);
}

std::vector<ControlInput> FormationTrackerPolicy::act(const FormationEnv& env) {
  std::vector<ControlInput> out;
  for (int i = 1; i <= env.n_followers(); ++i) out.push_back(control(env, i));
  return out;
}

RandomPolicy::RandomPolicy(std::uint64_t seed) : rng_(make_rng(seed, 0x7a9d)) {}

void RandomPolicy::begin_episode(std::uint64_t seed) { rng_ = make_rng(seed, 0x7a9d); }

std::vector<ControlInput> RandomPolicy::act(const FormationEnv& env) {
  std::exponential_distribution<double> exp1(1.0);
  std::vector<ControlInput> out;
  for (int i = 0; i < env.n_followers(); ++i) {
    RawAction u{exp1(rng_), exp1(rng_), exp1(rng_)};
    const double total = u[0] + u[1] + u[2];
    for (double& x : u) x /= total;
    out.push_back(map_action(u, env.config().follower_limits));
  }
  return out;
}

}  // namespace sfc
