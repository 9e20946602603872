#include "sfc/geometry.hpp"

#include <stdexcept>

namespace sfc {

Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

double wrap_angle(double raw) {
  if (!std::isfinite(raw)) {
    throw std::domain_error("wrap_angle: non-finite angle");
  }
  // remainder() is exact and lands in [-pi, pi]; move the lower boundary up.
  double r = std::remainder(raw, 2.0 * kPi);
  if (r <= -kPi) {
    r += 2.0 * kPi;
  }
  return r;
}

Vec2 to_local(const Pose& pose, const Vec2& world_point) {
  return rotate(world_point - pose.position, -pose.heading.value());
}

Vec2 to_world(const Pose& pose, const Vec2& local_point) {
  return pose.position + rotate(local_point, pose.heading.value());
}

std::optional<Circle> circumcenter(const Vec2& p1, const Vec2& p2, const Vec2& p3) {
  const Vec2 b = p2 - p1;
  const Vec2 c = p3 - p1;
  const double twice_area = cross(b, c);
  if (!(std::abs(twice_area) >= kCollinearArea)) {
    return std::nullopt;
  }
  const double d = 2.0 * twice_area;
  const double b2 = b.squared_norm();
  const double c2 = c.squared_norm();
  const Vec2 u{(c.y * b2 - b.y * c2) / d, (b.x * c2 - c.x * b2) / d};
  return Circle{p1 + u, u.norm()};
}

}  // namespace sfc
