#include "sfc/dynamics.hpp"

#include <algorithm>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace sfc {

void MotionLimits::validate() const {
  if (!(max_speed > 0.0 && max_turn_rate > 0.0 && max_accel > 0.0 && max_angular_accel > 0.0)) {
    throw std::invalid_argument("motion limits must be positive");
  }
}

ControlInput clamp_controls(const ControlInput& raw, const MotionLimits& limits) {
  return {std::clamp(raw.accel, -limits.max_accel, limits.max_accel),
          std::clamp(raw.angular_accel, -limits.max_angular_accel, limits.max_angular_accel)};
}

StateNoise::StateNoise() : covariance_(Matrix5::Zero()), factor_(Matrix5::Zero()) {}

StateNoise::StateNoise(const Matrix5& covariance) : covariance_(covariance) {
  if (!covariance.allFinite() || !covariance.isApprox(covariance.transpose(), 1e-12)) {
    throw std::invalid_argument("state noise covariance must be finite and symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix5> eig(covariance);
  const Vector5 values = eig.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, values.cwiseAbs().maxCoeff());
  if (values.minCoeff() < -tol) {
    throw std::invalid_argument("state noise covariance must be positive semidefinite");
  }
  factor_ = eig.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  zero_ = covariance.isZero(0.0);
}

StateNoise StateNoise::diagonal(const Vector5& variances) {
  return StateNoise(Matrix5(variances.asDiagonal()));
}

StateNoise::Vector5 StateNoise::sample(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector5 z;
  for (int i = 0; i < 5; ++i) z[i] = normal(rng);
  return factor_ * z;
}

Vec2 arc_displacement(double speed, double heading, double turn_rate, double dt,
                      bool paper_literal_dy) {
  const double lateral_sign = paper_literal_dy ? -1.0 : 1.0;
  if (std::abs(turn_rate) < kStraightTurnRate) {
    const double s = std::sin(heading);
    const double c = std::cos(heading);
    const double half_turn = 0.5 * turn_rate * dt;
    return {speed * dt * (c - half_turn * s),
            lateral_sign * speed * dt * (s + half_turn * c)};
  }
  const double r = speed / turn_rate;
  const double end = heading + turn_rate * dt;
  return {r * (std::sin(end) - std::sin(heading)),
          lateral_sign * r * (std::cos(heading) - std::cos(end))};
}

AgentState step(const AgentState& state, const ControlInput& u, const MotionLimits& limits,
                const StateNoise& noise, Rng& rng, const StepOptions& opts) {
  if (!(opts.dt > 0.0)) {
    throw std::invalid_argument("step: dt must be positive");
  }
  const ControlInput c = clamp_controls(u, limits);
  const double dt = opts.dt;

  AgentState next;
  next.position = state.position + arc_displacement(state.speed, state.heading.value(),
                                                    state.turn_rate, dt, opts.paper_literal_dy);
  next.speed = std::clamp(state.speed + dt * c.accel, 0.0, limits.max_speed);
  next.heading = Angle(state.heading.value() + dt * state.turn_rate);
  next.turn_rate = std::clamp(state.turn_rate + dt * c.angular_accel, -limits.max_turn_rate,
                              limits.max_turn_rate);

  if (noise.is_zero()) return next;

  const StateNoise::Vector5 w = noise.sample(rng);
  next.position += rotate({w[0], w[1]}, next.heading.value());
  next.speed = std::clamp(next.speed + w[2], 0.0, limits.max_speed);
  next.heading += w[3];
  next.turn_rate = std::clamp(next.turn_rate + w[4], -limits.max_turn_rate, limits.max_turn_rate);
  return next;
}

}  // namespace sfc
