#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sfc/env.hpp"

namespace sfc {

/// Produces one control per follower from the current environment.
class FollowerPolicy {
 public:
  virtual ~FollowerPolicy() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(std::uint64_t /*seed*/) {}
  virtual std::vector<ControlInput> act(const FormationEnv& env) = 0;
  virtual std::unique_ptr<FollowerPolicy> clone() const = 0;
};

/// Brakes to a halt and holds still.
class StandStillPolicy final : public FollowerPolicy {
 public:
  std::string name() const override { return "still"; }
  std::vector<ControlInput> act(const FormationEnv& env) override;
  std::unique_ptr<FollowerPolicy> clone() const override {
    return std::make_unique<StandStillPolicy>(*this);
  }
};

struct TrackerGains {
  double position = 0.5;       // 1/s, slot error to velocity
  double heading = 1.5;        // desired turn rate per radian
  double turn_rate = 5.0;      // angular accel per rad/s of turn-rate error
  double speed = 5.0;          // accel per m/s of speed error
  /// Turn rate per unit stream-value error while a side is avoiding; zero
  /// ignores the avoidance state.
  double stream = 0.0;
  /// Speed per meter of obstacle range while avoiding (1/s).
  double approach = 0.7;
  double avoid_speed = 0.15;  // m/s, speed cap while avoiding
};

/// Scripted controller that steers every follower toward its slot, using the
/// navigator's true velocity as feedforward. Optionally follows the desired
/// streamline while an obstacle is being avoided.
class FormationTrackerPolicy final : public FollowerPolicy {
 public:
  explicit FormationTrackerPolicy(TrackerGains gains = {}) : gains_(gains) {}
  std::string name() const override { return gains_.stream > 0.0 ? "tracker_stream" : "tracker"; }
  std::vector<ControlInput> act(const FormationEnv& env) override;
  std::unique_ptr<FollowerPolicy> clone() const override {
    return std::make_unique<FormationTrackerPolicy>(*this);
  }

  /// Control for a single follower (1-based agent id).
  ControlInput control(const FormationEnv& env, int agent) const;

 private:
  TrackerGains gains_;
};

/// Actions drawn uniformly from the 3-simplex and mapped like a learned actor.
class RandomPolicy final : public FollowerPolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed = 0);
  std::string name() const override { return "random"; }
  void begin_episode(std::uint64_t seed) override;
  std::vector<ControlInput> act(const FormationEnv& env) override;
  std::unique_ptr<FollowerPolicy> clone() const override {
    return std::make_unique<RandomPolicy>(*this);
  }

 private:
  Rng rng_;
};

}  // namespace sfc
