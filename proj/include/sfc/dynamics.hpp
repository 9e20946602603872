#pragma once

#include <random>

#include <Eigen/Core>

#include "sfc/geometry.hpp"

namespace sfc {

using Rng = std::mt19937_64;

/// Kinematic state of one agent: [x, y, v, heading, turn rate].
struct AgentState {
  Vec2 position;
  double speed = 0.0;      // m/s, never negative
  Angle heading;
  double turn_rate = 0.0;  // rad/s

  Pose pose() const { return {position, heading}; }
  friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// Acceleration (m/s^2) and angular acceleration (rad/s^2).
struct ControlInput {
  double accel = 0.0;
  double angular_accel = 0.0;
  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

struct MotionLimits {
  double max_speed = 0.5;
  double max_turn_rate = 0.2;
  double max_accel = 0.5;
  double max_angular_accel = 0.5;

  void validate() const;
};

ControlInput clamp_controls(const ControlInput& raw, const MotionLimits& limits);

/// Zero-mean Gaussian state noise with a 5x5 covariance over
/// [x_local, y_local, v, heading, turn rate]. Position components are drawn
/// in the agent frame.
class StateNoise {
 public:
  using Matrix5 = Eigen::Matrix<double, 5, 5>;
  using Vector5 = Eigen::Matrix<double, 5, 1>;

  StateNoise();  // noiseless
  explicit StateNoise(const Matrix5& covariance);
  static StateNoise diagonal(const Vector5& variances);

  const Matrix5& covariance() const { return covariance_; }
  bool is_zero() const { return zero_; }

  Vector5 sample(Rng& rng) const;

 private:
  Matrix5 covariance_;
  Matrix5 factor_;  // factor * factor^T == covariance
  bool zero_ = true;
};

struct StepOptions {
  double dt = 0.1;
  /// Use the printed sign of the lateral arc displacement instead of the
  /// standard unicycle form.
  bool paper_literal_dy = false;
};

/// Turn rates below this use the second-order Taylor form of the arc.
inline constexpr double kStraightTurnRate = 1e-6;

/// Displacement over dt of a unicycle moving at constant (speed, turn_rate).
Vec2 arc_displacement(double speed, double heading, double turn_rate, double dt,
                      bool paper_literal_dy = false);

/// Noiseless update followed by additive state noise (skipped when the noise
/// is zero, in which case `rng` is untouched).
AgentState step(const AgentState& state, const ControlInput& u, const MotionLimits& limits,
                const StateNoise& noise, Rng& rng, const StepOptions& opts = {});

}  // namespace sfc
