#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sfc/dynamics.hpp"
#include "sfc/geometry.hpp"

namespace sfc {

/// Front-semicircle range finder. Rays are indexed from the rightmost
/// (-pi/2) to the leftmost (+pi/2) direction in steps of `resolution`.
struct LidarConfig {
  double resolution = 3.0 * kPi / 180.0;
  double d_min = 0.05;
  double d_max = 2.0;
  double noise_std = 0.2;

  int ray_count() const;
  int center_index() const { return ray_count() / 2; }
  double ray_angle(int index) const;
  void validate() const;
};

struct LidarScan {
  std::vector<double> angles;     // agent frame, strictly increasing
  std::vector<double> distances;  // clamped to [d_min, d_max]
  bool inside_obstacle = false;

  std::size_t size() const { return distances.size(); }
  /// Agent-frame endpoint of ray `n`.
  Vec2 endpoint(int n) const;
};

using ObstacleSet = std::vector<Circle>;

/// Distance along the unit ray `direction` from `origin` to the nearest
/// forward intersection with `circle`, if any.
std::optional<double> ray_circle_distance(const Vec2& origin, const Vec2& direction,
                                          const Circle& circle);

/// Casts every ray of `cfg` from `pose` against `obstacles`. Noise is only
/// drawn when cfg.noise_std > 0.
LidarScan raycast(const Pose& pose, std::span<const Circle> obstacles, const LidarConfig& cfg,
                  Rng& rng);

/// Closed run of consecutive ray indices.
struct RayInterval {
  int first = 0;
  int last = 0;
  int size() const { return last - first + 1; }
  bool contains(int n) const { return n >= first && n <= last; }
  friend bool operator==(const RayInterval&, const RayInterval&) = default;
};

inline constexpr int kMinIntervalRays = 3;

/// Maximal runs of rays reading below `d_risk`; runs shorter than three rays
/// are dropped.
std::vector<RayInterval> detect_intervals(const LidarScan& scan, double d_risk);

enum class Side { left = 0, right = 1 };

/// Interval assigned to one half of the field of view. `start` is the ray of
/// the interval closest to the heading and `end` the outermost one, so start
/// angles grow in magnitude as an obstacle slides past.
struct SideInterval {
  RayInterval rays;
  int start = 0;
  int end = 0;
};

struct SplitIntervals {
  std::optional<SideInterval> left;
  std::optional<SideInterval> right;

  const std::optional<SideInterval>& operator[](Side s) const {
    return s == Side::left ? left : right;
  }
};

/// Assigns each interval to the left (positive angles) or right half, keeping
/// the foremost interval per side. Intervals crossing the heading go whole to
/// the side holding their shortest ray.
SplitIntervals split_sides(std::span<const RayInterval> intervals, const LidarScan& scan);

struct NeighborReading {
  int id = 0;
  double distance = 0.0;
  double bearing = 0.0;  // world frame, from observer to neighbor
};

/// Relative measurement broadcast by the navigator about one follower.
struct Broadcast {
  double distance = 0.0;
  double bearing = 0.0;  // world frame, from navigator to follower
  bool stale = false;
};

struct NeighborGraph {
  int agent_count = 0;
  std::vector<std::vector<bool>> adjacency;
  std::vector<std::vector<NeighborReading>> readings;  // per agent, ordered by id
  std::vector<bool> reaches_navigator;                  // connected to agent 0 via the graph

  bool connected(int i, int j) const { return adjacency[i][j]; }
};

/// Connection-zone graph over agent positions (index 0 is the navigator).
/// `bearing_noise_std` and `distance_noise_std` default to noiseless.
NeighborGraph neighbor_observations(std::span<const Vec2> positions, double connection_radius,
                                    Rng* rng = nullptr, double distance_noise_std = 0.0,
                                    double bearing_noise_std = 0.0);

/// Navigator broadcast for every agent; followers cut off from the navigator
/// keep the previous value flagged stale.
std::vector<Broadcast> navigator_broadcast(const NeighborGraph& graph,
                                           std::span<const Vec2> positions,
                                           std::span<const Broadcast> previous);

}  // namespace sfc
