#include "sfc/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace sfc {

int LidarConfig::ray_count() const {
  return static_cast<int>(std::lround(kPi / resolution)) + 1;
}

double LidarConfig::ray_angle(int index) const {
  return (index - center_index()) * resolution;
}

void LidarConfig::validate() const {
  if (!(resolution > 0.0)) throw std::invalid_argument("lidar resolution must be positive");
  const double rays = kPi / resolution;
  if (std::abs(rays - std::round(rays)) > 1e-9) {
    throw std::invalid_argument("lidar resolution must divide the field of view");
  }
  if (ray_count() % 2 == 0) {
    throw std::invalid_argument("lidar needs a ray on the heading axis");
  }
  if (!(d_min >= 0.0 && d_min < d_max)) throw std::invalid_argument("lidar needs 0 <= d_min < d_max");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("lidar noise must be nonnegative");
}

Vec2 LidarScan::endpoint(int n) const {
  return {distances[n] * std::cos(angles[n]), distances[n] * std::sin(angles[n])};
}

std::optional<double> ray_circle_distance(const Vec2& origin, const Vec2& direction,
                                          const Circle& circle) {
  const Vec2 q = circle.center - origin;
  const double along = dot(direction, q);
  const double disc = along * along - (q.squared_norm() - circle.radius * circle.radius);
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  const double near = along - root;
  if (near >= 0.0) return near;
  const double far = along + root;
  if (far >= 0.0) return far;  // origin inside the circle
  return std::nullopt;
}

LidarScan raycast(const Pose& pose, std::span<const Circle> obstacles, const LidarConfig& cfg,
                  Rng& rng) {
  const int rays = cfg.ray_count();
  LidarScan scan;
  scan.angles.resize(rays);
  scan.distances.assign(rays, cfg.d_max);
  for (int n = 0; n < rays; ++n) scan.angles[n] = cfg.ray_angle(n);

  for (const Circle& c : obstacles) {
    if ((c.center - pose.position).norm() < c.radius) {
      scan.inside_obstacle = true;
      break;
    }
  }
  if (scan.inside_obstacle) {
    std::fill(scan.distances.begin(), scan.distances.end(), cfg.d_min);
    return scan;
  }

  for (int n = 0; n < rays; ++n) {
    const double world_angle = pose.heading.value() + scan.angles[n];
    const Vec2 dir{std::cos(world_angle), std::sin(world_angle)};
    double best = cfg.d_max;
    for (const Circle& c : obstacles) {
      if (auto t = ray_circle_distance(pose.position, dir, c); t && *t < best) best = *t;
    }
    scan.distances[n] = best;
  }
  if (cfg.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.noise_std);
    for (double& d : scan.distances) d += noise(rng);
  }
  for (double& d : scan.distances) d = std::clamp(d, cfg.d_min, cfg.d_max);
  return scan;
}

std::vector<RayInterval> detect_intervals(const LidarScan& scan, double d_risk) {
  std::vector<RayInterval> out;
  const int rays = static_cast<int>(scan.size());
  int n = 0;
  while (n < rays) {
    if (scan.distances[n] >= d_risk) {
      ++n;
      continue;
    }
    int last = n;
    while (last + 1 < rays && scan.distances[last + 1] < d_risk) ++last;
    if (last - n + 1 >= kMinIntervalRays) out.push_back({n, last});
    n = last + 1;
  }
  return out;
}

namespace {

int shortest_ray(const RayInterval& iv, const LidarScan& scan) {
  int best = iv.first;
  for (int n = iv.first + 1; n <= iv.last; ++n) {
    if (scan.distances[n] < scan.distances[best]) best = n;
  }
  return best;
}

Side side_of(const RayInterval& iv, const LidarScan& scan) {
  const int center = static_cast<int>(scan.size()) / 2;
  if (iv.first >= center) return Side::left;
  if (iv.last <= center) return Side::right;
  const int m = shortest_ray(iv, scan);
  if (m > center) return Side::left;
  if (m < center) return Side::right;
  // Shortest ray on the heading axis: the side holding more of the interval.
  return (iv.last - center) >= (center - iv.first) ? Side::left : Side::right;
}

}  // namespace

SplitIntervals split_sides(std::span<const RayInterval> intervals, const LidarScan& scan) {
  SplitIntervals out;
  for (const RayInterval& iv : intervals) {
    if (side_of(iv, scan) == Side::left) {
      if (!out.left || iv.first < out.left->start) out.left = SideInterval{iv, iv.first, iv.last};
    } else {
      if (!out.right || iv.last > out.right->start) out.right = SideInterval{iv, iv.last, iv.first};
    }
  }
  return out;
}

NeighborGraph neighbor_observations(std::span<const Vec2> positions, double connection_radius,
                                    Rng* rng, double distance_noise_std,
                                    double bearing_noise_std) {
  const int n = static_cast<int>(positions.size());
  NeighborGraph g;
  g.agent_count = n;
  g.adjacency.assign(n, std::vector<bool>(n, false));
  g.readings.assign(n, {});
  const bool noisy = rng && (distance_noise_std > 0.0 || bearing_noise_std > 0.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((positions[j] - positions[i]).norm() <= connection_radius) {
        g.adjacency[i][j] = g.adjacency[j][i] = true;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!g.adjacency[i][j]) continue;
      const Vec2 d = positions[j] - positions[i];
      NeighborReading r{j, d.norm(), std::atan2(d.y, d.x)};
      if (noisy) {
        r.distance = std::max(0.0, r.distance + distance_noise_std * normal(*rng));
        r.bearing = wrap_angle(r.bearing + bearing_noise_std * normal(*rng));
      }
      g.readings[i].push_back(r);
    }
  }

  g.reaches_navigator.assign(n, false);
  if (n > 0) {
    std::deque<int> frontier{0};
    g.reaches_navigator[0] = true;
    while (!frontier.empty()) {
      const int i = frontier.front();
      frontier.pop_front();
      for (int j = 0; j < n; ++j) {
        if (g.adjacency[i][j] && !g.reaches_navigator[j]) {
          g.reaches_navigator[j] = true;
          frontier.push_back(j);
        }
      }
    }
  }
  return g;
}

std::vector<Broadcast> navigator_broadcast(const NeighborGraph& graph,
                                           std::span<const Vec2> positions,
                                           std::span<const Broadcast> previous) {
  const int n = graph.agent_count;
  std::vector<Broadcast> out(n);
  for (int i = 1; i < n; ++i) {
    if (graph.reaches_navigator[i]) {
      const Vec2 d = positions[i] - positions[0];
      out[i] = {d.norm(), std::atan2(d.y, d.x), false};
    } else if (i < static_cast<int>(previous.size())) {
      out[i] = previous[i];
      out[i].stale = true;
    } else {
      out[i].stale = true;
    }
  }
  return out;
}

}  // namespace sfc
