#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sfc/apf.hpp"
#include "sfc/dynamics.hpp"
#include "sfc/formation.hpp"
#include "sfc/sensing.hpp"
#include "sfc/stream_avoid.hpp"

namespace sfc {

enum class NavigatorMode { straight, waypoints };

/// Scripted trajectory of the navigator (agent 0).
struct NavigatorConfig {
  NavigatorMode mode = NavigatorMode::straight;
  double cruise_speed = 0.35;
  double initial_heading = 0.0;
  std::vector<Vec2> waypoints;  // world frame, visited in order
  double waypoint_tolerance = 0.3;
  double heading_gain = 1.0;    // desired turn rate per radian of heading error
};

struct EnvConfig {
  int n_followers = 4;
  double formation_radius = 2.1;
  /// Optional explicit offsets; overrides the evenly spaced circle when set.
  std::vector<Vec2> formation_offsets;
  double area_size = 14.0;
  int max_obstacles = 5;
  double obstacle_radius_min = 0.1;
  double obstacle_radius_max = 0.5;
  double spawn_clearance = 1.0;
  int episode_steps = 250;
  double dt = 0.1;
  double agent_size = 0.1;  // side of the square body
  MotionLimits follower_limits{0.5, 0.2, 0.5, 0.5};
  MotionLimits navigator_limits{0.35, 0.06, 0.5, 0.5};
  Eigen::Matrix<double, 5, 1> state_noise_variances =
      (Eigen::Matrix<double, 5, 1>() << 1e-2, 1e-2, 1e-4, 3.2e-4, 3.2e-6).finished();
  bool navigator_noise = true;
  bool paper_literal_dy = false;
  LidarConfig lidar;
  bool agents_visible_to_lidar = true;
  double connection_radius = 7.0;
  StreamParams stream;
  double apf_gain = 1.0;
  AvoidanceMethod avoidance_cost = AvoidanceMethod::stream;
  Eigen::Matrix2d tracking_weight = Eigen::Matrix2d::Identity();
  NavigatorConfig navigator;

  double agent_radius() const;
  FormationSpec formation() const;
  /// Every violated constraint, empty when the config is usable.
  std::vector<std::string> violations() const;
};

/// Index arithmetic of the flat per-follower observation vector.
struct ObservationLayout {
  int neighbor_slots = 0;

  static constexpr int kError = 0;      // e_x, e_y
  static constexpr int kHeading = 2;
  static constexpr int kSpeed = 3;
  static constexpr int kTurnRate = 4;
  static constexpr int kNeighbors = 5;  // (distance, bearing) per slot
  static constexpr int kSensorPerSide = 6;
  static constexpr int kCylinderPerSide = 3;

  int sensor_offset(Side s) const {
    return kNeighbors + 2 * neighbor_slots + kSensorPerSide * static_cast<int>(s);
  }
  int cylinder_offset(Side s) const {
    return kNeighbors + 2 * neighbor_slots + 2 * kSensorPerSide + kCylinderPerSide * static_cast<int>(s);
  }
  int size() const { return kNeighbors + 2 * neighbor_slots + 2 * kSensorPerSide + 2 * kCylinderPerSide; }
};

using Observation = std::vector<double>;

/// Everything that changes during an episode. Agent 0 is the navigator.
struct WorldState {
  int step = 0;
  std::vector<AgentState> agents;
  ObstacleSet obstacles;
  std::vector<AvoidanceState> avoidance;    // per agent, navigator slot unused
  std::vector<Broadcast> broadcast;         // per agent, navigator slot unused
  std::vector<LidarScan> scans;             // per agent, navigator slot empty
  std::vector<AvoidanceUpdate> detections;  // per agent
  NeighborGraph graph;
  std::size_t waypoint_index = 0;
  std::vector<Rng> motion_rngs;  // per agent
  std::vector<Rng> sensor_rngs;  // per agent
};

struct FollowerStep {
  double r_tracking = 0.0;
  double r_avoiding = 0.0;
  double reward = 0.0;  // r_tracking + r_avoiding (a cost)
  Vec2 error;           // from the navigator broadcast
  Vec2 true_error;      // from world positions
  bool collision = false;
};

struct StepResult {
  std::vector<Observation> observations;  // per follower
  std::vector<FollowerStep> followers;
  bool done = false;
  bool any_collision = false;
};

/// Deterministic seeded sub-stream; `stream` separates independent users.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

/// Control for agent 0 following the scripted trajectory.
ControlInput navigator_control(const AgentState& nav, const NavigatorConfig& nav_cfg,
                               const MotionLimits& limits, double dt, std::size_t& waypoint_index);

/// Multi-agent formation episode: scripted navigator, learned or scripted
/// followers, circular obstacles and per-follower local sensing.
class FormationEnv {
 public:
  explicit FormationEnv(EnvConfig cfg);

  const EnvConfig& config() const { return cfg_; }
  const FormationSpec& formation() const { return formation_; }
  const ObservationLayout& layout() const { return layout_; }
  int observation_size() const { return layout_.size(); }
  int n_followers() const { return cfg_.n_followers; }

  /// Fresh world from `seed`; returns the initial per-follower observations.
  std::vector<Observation> reset(std::uint64_t seed);
  /// Same as reset but with caller-chosen obstacles.
  std::vector<Observation> reset_with_obstacles(std::uint64_t seed, ObstacleSet obstacles);

  /// Advances one step; `actions` holds one control per follower.
  StepResult step(const std::vector<ControlInput>& actions);

  const WorldState& world() const { return world_; }
  WorldState& mutable_world() { return world_; }
  const std::vector<Observation>& observations() const { return observations_; }

  /// Recomputes sensors, observations and rewards for the current world
  /// without advancing it (used after editing the world directly).
  StepResult sense();

 private:
  ObstacleSet sample_obstacles(Rng& rng) const;
  void init_world(std::uint64_t seed, ObstacleSet obstacles);
  Observation build_observation(int agent) const;
  StepResult evaluate_step(bool advance_rewards);

  EnvConfig cfg_;
  FormationSpec formation_;
  ObservationLayout layout_;
  StateNoise follower_noise_;
  StateNoise navigator_noise_;
  TrackingWeight weight_;
  WorldState world_;
  std::vector<Observation> observations_;
};

}  // namespace sfc
