#pragma once

#include <vector>

#include <Eigen/Core>

#include "sfc/geometry.hpp"

namespace sfc {

/// Desired offsets of the followers relative to the navigator, world frame.
struct FormationSpec {
  std::vector<Vec2> offsets;

  /// Followers evenly spaced on a circle, the first one at `first_angle`.
  static FormationSpec circle(int followers, double radius, double first_angle = kPi / 2.0);
  /// Offsets from per-follower (distance, bearing) pairs.
  static FormationSpec from_polar(const std::vector<double>& distances,
                                  const std::vector<double>& bearings);

  void validate() const;
};

/// Symmetric positive-definite 2x2 weight of the tracking cost.
class TrackingWeight {
 public:
  TrackingWeight() : q_(Eigen::Matrix2d::Identity()) {}
  /// Throws std::invalid_argument unless q is symmetric positive definite.
  explicit TrackingWeight(const Eigen::Matrix2d& q);

  const Eigen::Matrix2d& matrix() const { return q_; }

 private:
  Eigen::Matrix2d q_;
};

/// z = (d cos(theta), d sin(theta)), displacement of a follower from the
/// navigator rebuilt from the navigator's broadcast.
Vec2 relative_displacement(double distance, double bearing);

inline Vec2 tracking_error(const Vec2& displacement, const Vec2& offset) {
  return displacement - offset;
}

/// e^T Q e.
double tracking_cost(const Vec2& error, const TrackingWeight& weight);

}  // namespace sfc
