#pragma once

#include <cmath>
#include <numbers>
#include <optional>

namespace sfc {

inline constexpr double kPi = std::numbers::pi;

/// Planar vector in meters. Used for world positions, agent-frame points and
/// formation offsets alike.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  double norm() const { return std::hypot(x, y); }
  constexpr double squared_norm() const { return x * x + y * y; }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

/// Rotate counter-clockwise by `angle` radians.
Vec2 rotate(const Vec2& v, double angle);

/// Wraps any finite angle into (-pi, pi]. Throws std::domain_error on NaN/Inf.
double wrap_angle(double raw);

/// Heading angle that is always kept in (-pi, pi].
class Angle {
 public:
  constexpr Angle() = default;
  explicit Angle(double radians) : value_(wrap_angle(radians)) {}

  double value() const { return value_; }
  operator double() const { return value_; }

  Angle& operator+=(double delta) {
    value_ = wrap_angle(value_ + delta);
    return *this;
  }

  friend bool operator==(const Angle&, const Angle&) = default;

 private:
  double value_ = 0.0;
};

/// Position plus heading in the world frame.
struct Pose {
  Vec2 position;
  Angle heading;
};

/// World point expressed in the frame of `pose` (x forward, y to the left).
Vec2 to_local(const Pose& pose, const Vec2& world_point);
/// Inverse of to_local.
Vec2 to_world(const Pose& pose, const Vec2& local_point);

struct Circle {
  Vec2 center;
  double radius = 0.0;

  friend constexpr bool operator==(const Circle&, const Circle&) = default;
};

/// Twice the signed triangle area below which three points count as collinear.
inline constexpr double kCollinearArea = 1e-9;

/// Circumscribed circle of a triangle; std::nullopt when the points are
/// (numerically) collinear or coincide.
std::optional<Circle> circumcenter(const Vec2& p1, const Vec2& p2, const Vec2& p3);

}  // namespace sfc
