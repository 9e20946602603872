#include "sfc/stream_avoid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sfc {

void StreamParams::validate() const {
  if (!(flow_strength > 0.0)) throw std::invalid_argument("flow_strength must be positive");
  if (!(d_stop > 0.0 && d_stop < d_risk)) {
    throw std::invalid_argument("safe distance range needs 0 < d_stop < d_risk");
  }
  if (!(max_cylinder_radius > 0.0)) throw std::invalid_argument("max_cylinder_radius must be positive");
}

double stream_value(const Vec2& p_rel, double radius, double flow_strength) {
  const double rho2 = p_rel.squared_norm();
  if (!(rho2 >= kDoubletGuard * kDoubletGuard)) {
    throw std::domain_error("stream_value: point at the doublet singularity");
  }
  return flow_strength * p_rel.y * (1.0 - radius * radius / rho2);
}

std::optional<Circle> estimate_cylinder(const Vec2& p_start, const Vec2& p_m, const Vec2& p_end) {
  return circumcenter(p_start, p_m, p_end);
}

Circle default_cylinder(const LidarScan& scan, int shortest) {
  constexpr double kRadius = 0.1;
  const double angle = scan.angles[shortest];
  const double reach = scan.distances[shortest] + kRadius;
  return {{reach * std::cos(angle), reach * std::sin(angle)}, kRadius};
}

int shortest_interior_ray(const RayInterval& interval, const LidarScan& scan) {
  if (interval.size() < kMinIntervalRays) {
    throw std::invalid_argument("shortest_interior_ray: interval needs at least 3 rays");
  }
  int best = interval.first + 1;
  for (int n = best + 1; n < interval.last; ++n) {
    if (scan.distances[n] < scan.distances[best]) best = n;
  }
  return best;
}

namespace {

double side_sign(Side s) { return s == Side::left ? -1.0 : 1.0; }

// Stream value that saturates to the far-field value at the singularity.
double guarded_stream_value(const Vec2& p_rel, double radius, double flow_strength,
                            double fallback) {
  if (p_rel.squared_norm() < kDoubletGuard * kDoubletGuard) return fallback;
  return stream_value(p_rel, radius, flow_strength);
}

// Desired streamline must lie at least as far out as the bound streamline.
double clamp_to_bound(double c, double bound, Side s) {
  return s == Side::left ? std::min(c, bound) : std::max(c, bound);
}

}  // namespace

double stream_bound(const Circle& cylinder, double d_stop, double flow_strength, Side side) {
  const Vec2 point{0.0, side_sign(side) * d_stop};
  return guarded_stream_value(point - cylinder.center, cylinder.radius, flow_strength,
                              side_sign(side) * flow_strength * d_stop);
}

double avoidance_cost(const std::array<SideReport, 2>& sides, double d_risk) {
  double cost = 0.0;
  for (const SideReport& s : sides) {
    if (!s.avoiding) continue;
    const double err = s.c_current - s.c_desired;
    cost += err * err * (1.0 / s.shortest_distance - 1.0 / d_risk);
  }
  return cost;
}

AvoidanceUpdate avoidance_update(const LidarScan& scan, AvoidanceState& state,
                                 const StreamParams& params) {
  const std::vector<RayInterval> intervals = detect_intervals(scan, params.d_risk);
  const SplitIntervals split = split_sides(intervals, scan);
  const double U = params.flow_strength;

  AvoidanceUpdate out;
  for (Side side : {Side::left, Side::right}) {
    SideMemory& mem = state[side];
    SideReport& rep = out.sides[static_cast<int>(side)];
    const std::optional<SideInterval>& iv = split[side];
    if (!iv) {
      mem = SideMemory{};
      continue;
    }

    rep.avoiding = true;
    rep.start = iv->start;
    rep.end = iv->end;
    rep.shortest = shortest_interior_ray(iv->rays, scan);
    rep.shortest_distance = scan.distances[rep.shortest];

    std::optional<Circle> cyl =
        estimate_cylinder(scan.endpoint(rep.start), scan.endpoint(rep.shortest), scan.endpoint(rep.end));
    if (cyl && (cyl->radius > params.max_cylinder_radius || cyl->center.norm() <= cyl->radius)) {
      cyl.reset();
    }
    rep.default_cylinder = !cyl;
    rep.cylinder = cyl ? *cyl : default_cylinder(scan, rep.shortest);

    // Agent sits at -p_cyl relative to the cylinder.
    rep.c_current = guarded_stream_value(-rep.cylinder.center, rep.cylinder.radius, U, 0.0);
    rep.c_bound = stream_bound(rep.cylinder, params.d_stop, U, side);

    const double start_angle = scan.angles[rep.start];
    rep.rising_edge = !mem.avoiding;
    rep.new_obstacle = !rep.rising_edge && std::abs(start_angle) <= std::abs(mem.prev_start_angle);
    if (rep.rising_edge || rep.new_obstacle) {
      mem.c_desired = clamp_to_bound(rep.c_current, rep.c_bound, side);
    }
    mem.avoiding = true;
    mem.prev_start_angle = start_angle;
    mem.cylinder = rep.cylinder;
    rep.c_desired = mem.c_desired;
  }
  out.cost = avoidance_cost(out.sides, params.d_risk);
  return out;
}

}  // namespace sfc
