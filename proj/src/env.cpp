#include "sfc/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace sfc {

namespace {

constexpr std::uint64_t kObstacleStream = 0x0b57;
constexpr std::uint64_t kMotionStream = 0x1000;
constexpr std::uint64_t kSensorStream = 0x2000;

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

double EnvConfig::agent_radius() const { return agent_size / std::sqrt(2.0); }

FormationSpec EnvConfig::formation() const {
  if (!formation_offsets.empty()) return FormationSpec{formation_offsets};
  return FormationSpec::circle(n_followers, formation_radius);
}

std::vector<std::string> EnvConfig::violations() const {
  std::vector<std::string> v;
  auto check = [&v](bool ok, const char* msg) {
    if (!ok) v.emplace_back(msg);
  };
  check(n_followers >= 1, "env.n_followers must be >= 1");
  check(formation_radius > 0.0, "env.formation_radius must be positive");
  check(formation_offsets.empty() || static_cast<int>(formation_offsets.size()) == n_followers,
        "env.formation_offsets must hold one offset per follower");
  check(area_size > 0.0, "env.area_size must be positive");
  check(max_obstacles >= 0, "env.max_obstacles must be >= 0");
  check(obstacle_radius_min > 0.0 && obstacle_radius_min <= obstacle_radius_max,
        "env obstacle radius range must satisfy 0 < min <= max");
  check(spawn_clearance >= 0.0, "env.spawn_clearance must be >= 0");
  check(episode_steps >= 1, "env.episode_steps must be >= 1");
  check(dt > 0.0, "env.dt must be positive");
  check(agent_size > 0.0, "env.agent_size must be positive");
  check(connection_radius > 0.0, "env.connection_radius must be positive");
  check(apf_gain > 0.0, "env.apf_gain must be positive");
  check(navigator.cruise_speed >= 0.0 && navigator.cruise_speed <= navigator_limits.max_speed,
        "env.navigator.cruise_speed must be in [0, navigator max speed]");
  check(navigator.mode != NavigatorMode::waypoints || !navigator.waypoints.empty(),
        "env.navigator.waypoints must be non-empty in waypoint mode");
  check((state_noise_variances.array() >= 0.0).all(), "env.state_noise variances must be >= 0");
  auto capture = [&v](const char* prefix, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      v.push_back(std::string(prefix) + e.what());
    }
  };
  capture("env.follower_limits: ", [&] { follower_limits.validate(); });
  capture("env.navigator_limits: ", [&] { navigator_limits.validate(); });
  capture("env.lidar: ", [&] { lidar.validate(); });
  capture("env.stream: ", [&] { stream.validate(); });
  capture("env.tracking_weight: ", [&] { TrackingWeight{tracking_weight}; });
  capture("env.formation: ", [&] {
    if (n_followers >= 1) formation().validate();
  });
  return v;
}

ControlInput navigator_control(const AgentState& nav, const NavigatorConfig& nav_cfg,
                               const MotionLimits& limits, double dt, std::size_t& waypoint_index) {
  double target_heading = nav_cfg.initial_heading;
  if (nav_cfg.mode == NavigatorMode::waypoints && !nav_cfg.waypoints.empty()) {
    while (waypoint_index + 1 < nav_cfg.waypoints.size() &&
           (nav_cfg.waypoints[waypoint_index] - nav.position).norm() < nav_cfg.waypoint_tolerance) {
      ++waypoint_index;
    }
    const Vec2 to_goal = nav_cfg.waypoints[waypoint_index] - nav.position;
    if (to_goal.norm() >= nav_cfg.waypoint_tolerance) {
      target_heading = std::atan2(to_goal.y, to_goal.x);
    } else {
      target_heading = nav.heading.value();
    }
  }
  const double heading_error = wrap_angle(target_heading - nav.heading.value());
  const double desired_turn =
      std::clamp(nav_cfg.heading_gain * heading_error, -limits.max_turn_rate, limits.max_turn_rate);
  const double speed = std::min(nav_cfg.cruise_speed, limits.max_speed);
  return clamp_controls({(speed - nav.speed) / dt, (desired_turn - nav.turn_rate) / dt}, limits);
}

FormationEnv::FormationEnv(EnvConfig cfg) : cfg_(std::move(cfg)) {
  if (auto v = cfg_.violations(); !v.empty()) {
    throw std::invalid_argument("invalid env config: " + join(v));
  }
  formation_ = cfg_.formation();
  layout_.neighbor_slots = cfg_.n_followers;
  follower_noise_ = StateNoise::diagonal(cfg_.state_noise_variances);
  navigator_noise_ = cfg_.navigator_noise ? follower_noise_ : StateNoise{};
  weight_ = TrackingWeight(cfg_.tracking_weight);
}

ObstacleSet FormationEnv::sample_obstacles(Rng& rng) const {
  std::uniform_int_distribution<int> count_dist(0, cfg_.max_obstacles);
  std::uniform_real_distribution<double> coord(-0.5 * cfg_.area_size, 0.5 * cfg_.area_size);
  std::uniform_real_distribution<double> radius(cfg_.obstacle_radius_min, cfg_.obstacle_radius_max);
  const int count = count_dist(rng);

  std::vector<Vec2> starts{Vec2{}};
  for (const Vec2& off : formation_.offsets) starts.push_back(off);

  ObstacleSet obstacles;
  for (int k = 0; k < count; ++k) {
    const double r = radius(rng);
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const Vec2 c{coord(rng), coord(rng)};
      placed = std::all_of(starts.begin(), starts.end(), [&](const Vec2& s) {
        return (c - s).norm() >= cfg_.spawn_clearance + r;
      });
      if (placed) obstacles.push_back({c, r});
    }
    if (!placed) throw std::runtime_error("reset: could not place obstacles, area too crowded");
  }
  return obstacles;
}

void FormationEnv::init_world(std::uint64_t seed, ObstacleSet obstacles) {
  const int agents = cfg_.n_followers + 1;
  world_ = WorldState{};
  world_.obstacles = std::move(obstacles);
  world_.agents.resize(agents);
  const Angle heading(cfg_.navigator.initial_heading);
  world_.agents[0].heading = heading;
  for (int i = 1; i < agents; ++i) {
    world_.agents[i].position = formation_.offsets[i - 1];
    world_.agents[i].heading = heading;
  }
  world_.avoidance.assign(agents, AvoidanceState{});
  world_.broadcast.assign(agents, Broadcast{});
  world_.scans.assign(agents, LidarScan{});
  world_.detections.assign(agents, AvoidanceUpdate{});
  for (int i = 0; i < agents; ++i) {
    world_.motion_rngs.push_back(make_rng(seed, kMotionStream + i));
    world_.sensor_rngs.push_back(make_rng(seed, kSensorStream + i));
  }
}

std::vector<Observation> FormationEnv::reset(std::uint64_t seed) {
  Rng rng = make_rng(seed, kObstacleStream);
  return reset_with_obstacles(seed, sample_obstacles(rng));
}

std::vector<Observation> FormationEnv::reset_with_obstacles(std::uint64_t seed, ObstacleSet obstacles) {
  init_world(seed, std::move(obstacles));
  evaluate_step(false);
  return observations_;
}

StepResult FormationEnv::sense() { return evaluate_step(false); }

StepResult FormationEnv::step(const std::vector<ControlInput>& actions) {
  if (static_cast<int>(actions.size()) != cfg_.n_followers) {
    throw std::invalid_argument("step: expected one action per follower");
  }
  const StepOptions opts{cfg_.dt, cfg_.paper_literal_dy};
  const std::vector<AgentState> snapshot = world_.agents;

  const ControlInput nav_u = navigator_control(snapshot[0], cfg_.navigator, cfg_.navigator_limits,
                                               cfg_.dt, world_.waypoint_index);
  world_.agents[0] = sfc::step(snapshot[0], nav_u, cfg_.navigator_limits, navigator_noise_,
                               world_.motion_rngs[0], opts);
  for (int i = 1; i <= cfg_.n_followers; ++i) {
    world_.agents[i] = sfc::step(snapshot[i], actions[i - 1], cfg_.follower_limits, follower_noise_,
                                 world_.motion_rngs[i], opts);
  }
  ++world_.step;
  return evaluate_step(true);
}

StepResult FormationEnv::evaluate_step(bool advance_rewards) {
  const int agents = cfg_.n_followers + 1;
  const double body = cfg_.agent_radius();
  StepResult result;
  result.followers.resize(cfg_.n_followers);

  // Collisions on the post-step world; the navigator is virtual.
  if (advance_rewards) {
    for (int i = 1; i < agents; ++i) {
      const Vec2 p = world_.agents[i].position;
      bool hit = std::any_of(world_.obstacles.begin(), world_.obstacles.end(), [&](const Circle& c) {
        return (p - c.center).norm() <= body + c.radius;
      });
      for (int j = 1; j < agents && !hit; ++j) {
        hit = j != i && (p - world_.agents[j].position).norm() <= 2.0 * body;
      }
      result.followers[i - 1].collision = hit;
      result.any_collision = result.any_collision || hit;
    }
    for (int i = 1; i < agents; ++i) {
      if (result.followers[i - 1].collision) world_.agents[i].speed = 0.0;
    }
  }

  std::vector<Vec2> positions(agents);
  for (int i = 0; i < agents; ++i) positions[i] = world_.agents[i].position;
  world_.graph = neighbor_observations(positions, cfg_.connection_radius);
  world_.broadcast = navigator_broadcast(world_.graph, positions, world_.broadcast);

  const ApfParams apf{cfg_.avoidance_cost == AvoidanceMethod::apf_stop ? cfg_.stream.d_stop
                                                                       : cfg_.stream.d_risk,
                      cfg_.apf_gain};
  for (int i = 1; i < agents; ++i) {
    ObstacleSet visible = world_.obstacles;
    if (cfg_.agents_visible_to_lidar) {
      for (int j = 1; j < agents; ++j) {
        if (j != i) visible.push_back({positions[j], body});
      }
    }
    world_.scans[i] = raycast(world_.agents[i].pose(), visible, cfg_.lidar, world_.sensor_rngs[i]);
    world_.detections[i] = avoidance_update(world_.scans[i], world_.avoidance[i], cfg_.stream);

    FollowerStep& f = result.followers[i - 1];
    const Broadcast& b = world_.broadcast[i];
    f.error = tracking_error(relative_displacement(b.distance, b.bearing), formation_.offsets[i - 1]);
    f.true_error = positions[i] - positions[0] - formation_.offsets[i - 1];
    f.r_tracking = tracking_cost(f.error, weight_);
    f.r_avoiding = cfg_.avoidance_cost == AvoidanceMethod::stream ? world_.detections[i].cost
                                                                  : apf_cost(world_.detections[i], apf);
    f.reward = f.r_tracking + f.r_avoiding;
  }

  observations_.resize(cfg_.n_followers);
  for (int i = 1; i < agents; ++i) observations_[i - 1] = build_observation(i);
  result.observations = observations_;
  result.done = world_.step >= cfg_.episode_steps;
  return result;
}

Observation FormationEnv::build_observation(int agent) const {
  const double d_max = cfg_.lidar.d_max;
  Observation o(layout_.size(), 0.0);
  const AgentState& s = world_.agents[agent];
  const Broadcast& b = world_.broadcast[agent];
  const Vec2 e = tracking_error(relative_displacement(b.distance, b.bearing),
                                formation_.offsets[agent - 1]);
  o[ObservationLayout::kError] = e.x;
  o[ObservationLayout::kError + 1] = e.y;
  o[ObservationLayout::kHeading] = s.heading.value();
  o[ObservationLayout::kSpeed] = s.speed;
  o[ObservationLayout::kTurnRate] = s.turn_rate;

  // Slots hold every other agent in id order.
  int slot = 0;
  const auto& readings = world_.graph.readings[agent];
  for (int j = 0; j <= cfg_.n_followers; ++j) {
    if (j == agent) continue;
    const int at = ObservationLayout::kNeighbors + 2 * slot++;
    o[at] = d_max;
    for (const NeighborReading& r : readings) {
      if (r.id == j) {
        o[at] = r.distance;
        o[at + 1] = r.bearing;
      }
    }
  }

  const LidarScan& scan = world_.scans[agent];
  const AvoidanceUpdate& det = world_.detections[agent];
  for (Side side : {Side::left, Side::right}) {
    const SideReport& rep = det[side];
    const int sensor = layout_.sensor_offset(side);
    const int cyl = layout_.cylinder_offset(side);
    const int rays[3] = {rep.start, rep.shortest, rep.end};
    for (int k = 0; k < 3; ++k) {
      o[sensor + 2 * k] = rep.avoiding ? scan.distances[rays[k]] : d_max;
      o[sensor + 2 * k + 1] = rep.avoiding ? scan.angles[rays[k]] : 0.0;
    }
    if (rep.avoiding) {
      o[cyl] = rep.cylinder.center.x;
      o[cyl + 1] = rep.cylinder.center.y;
      o[cyl + 2] = rep.cylinder.radius;
    }
  }
  return o;
}

}  // namespace sfc
