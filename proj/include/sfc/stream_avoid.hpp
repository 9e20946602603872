#pragma once

#include <array>
#include <optional>

#include "sfc/geometry.hpp"
#include "sfc/sensing.hpp"

namespace sfc {

struct StreamParams {
  double flow_strength = 1.0;  // U
  double d_risk = 0.7;         // avoidance engages below this range
  double d_stop = 0.4;         // braking distance used for the bound streamline
  /// Fitted cylinders larger than this, or enclosing the agent, are replaced
  /// by the default cylinder.
  double max_cylinder_radius = 2.0;

  void validate() const;
};

/// Points closer than this to a cylinder center are inside the doublet
/// singularity.
inline constexpr double kDoubletGuard = 1e-9;

/// Uniform flow along +x past a cylinder of radius `radius` at the origin:
/// psi = U*y - U*r^2*y / (x^2 + y^2). Throws std::domain_error at the center.
double stream_value(const Vec2& p_rel, double radius, double flow_strength);

/// Virtual obstacle fitted through three interval endpoints (agent frame).
/// std::nullopt when the endpoints are collinear.
std::optional<Circle> estimate_cylinder(const Vec2& p_start, const Vec2& p_m, const Vec2& p_end);

/// Fallback obstacle when no usable triangle exists: a circle of radius
/// 0.1 m just behind the shortest ray's endpoint.
Circle default_cylinder(const LidarScan& scan, int shortest);

/// Index of the shortest ray strictly inside the interval (ties go to the
/// smaller index). Throws std::invalid_argument for intervals under 3 rays.
int shortest_interior_ray(const RayInterval& interval, const LidarScan& scan);

/// Stream value of the point d_stop to the obstacle-free side of the agent
/// ((0, -d_stop) for an obstacle on the left, (0, +d_stop) on the right).
double stream_bound(const Circle& cylinder, double d_stop, double flow_strength, Side side);

/// Per-side memory carried between steps.
struct SideMemory {
  bool avoiding = false;
  double c_desired = 0.0;
  double prev_start_angle = 0.0;  // valid while avoiding
  std::optional<Circle> cylinder;

  friend bool operator==(const SideMemory&, const SideMemory&) = default;
};

struct AvoidanceState {
  std::array<SideMemory, 2> sides;

  SideMemory& operator[](Side s) { return sides[static_cast<int>(s)]; }
  const SideMemory& operator[](Side s) const { return sides[static_cast<int>(s)]; }
  friend bool operator==(const AvoidanceState&, const AvoidanceState&) = default;
};

/// What one side saw and decided during an update.
struct SideReport {
  bool avoiding = false;
  bool rising_edge = false;
  bool new_obstacle = false;
  bool default_cylinder = false;
  int start = -1;
  int shortest = -1;
  int end = -1;
  Circle cylinder;               // agent frame
  double c_current = 0.0;
  double c_desired = 0.0;
  double c_bound = 0.0;
  double shortest_distance = 0.0;  // |p_m|
};

struct AvoidanceUpdate {
  std::array<SideReport, 2> sides;
  double cost = 0.0;

  const SideReport& operator[](Side s) const { return sides[static_cast<int>(s)]; }
};

/// Weighted stream-value error summed over the sides that are avoiding:
/// sum (c - c_desired)^2 * (1/|p_m| - 1/d_risk).
double avoidance_cost(const std::array<SideReport, 2>& sides, double d_risk);

/// One step of the avoidance decision policy for a single agent: detects the
/// foremost interval per side, fits virtual cylinders, maintains the desired
/// stream values in `state` and returns the avoidance cost.
AvoidanceUpdate avoidance_update(const LidarScan& scan, AvoidanceState& state,
                                 const StreamParams& params);

}  // namespace sfc
