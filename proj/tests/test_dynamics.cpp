#include <doctest.h>

#include <cmath>
#include <random>

#include "sfc/dynamics.hpp"

using namespace sfc;

namespace {

const MotionLimits kWide{10.0, 10.0, 10.0, 10.0};

AgentState make_state(double x, double y, double v, double heading, double omega) {
  AgentState s;
  s.position = {x, y};
  s.speed = v;
  s.heading = Angle(heading);
  s.turn_rate = omega;
  return s;
}

}  // namespace

TEST_CASE("step examples") {
  Rng rng(1);
  const StateNoise quiet;
  AgentState s = step(make_state(0, 0, 1, 0, 0), {}, kWide, quiet, rng);
  CHECK(s.position.x == doctest::Approx(0.1));
  CHECK(s.position.y == 0.0);

  const AgentState a = step(make_state(0, 0, 1, 0, 1e-9), {}, kWide, quiet, rng);
  CHECK((a.position - s.position).norm() < 1e-6);

  s = step(make_state(0, 0, 0, 0, 0.2), {}, MotionLimits{}, quiet, rng);
  CHECK(s.position.x == 0.0);
  CHECK(s.position.y == 0.0);
  CHECK(s.heading.value() == doctest::Approx(0.02));
  CHECK_THROWS_AS(step(s, {}, kWide, quiet, rng, {0.0, false}), std::invalid_argument);
}

TEST_CASE("forward motion at heading pi/2 increases y; literal flag flips it") {
  Rng rng(1);
  const AgentState s = make_state(0, 0, 0.5, kPi / 2, 0.1);
  CHECK(step(s, {}, kWide, StateNoise{}, rng).position.y > 0.0);
  CHECK(step(s, {}, kWide, StateNoise{}, rng, {0.1, true}).position.y < 0.0);
}

TEST_CASE("arc displacement matches the exact arc on a circle") {
  // Moving for dt along a circle of radius v/w centered left of the agent.
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = 0.5 * (u(gen) + 1.0), heading = kPi * u(gen), w = 0.5 * u(gen), dt = 0.1;
    if (std::abs(w) < 1e-3) continue;
    const double r = v / w;
    const Vec2 center{-r * std::sin(heading), r * std::cos(heading)};
    const double phi = heading + w * dt;
    const Vec2 end = center + Vec2{r * std::sin(phi), -r * std::cos(phi)};
    const Vec2 d = arc_displacement(v, heading, w, dt);
    REQUIRE((d - end).norm() < 1e-12);
  }
}

TEST_CASE("turn-rate continuity near zero") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Rng rng(0);
  for (int i = 0; i < 1000; ++i) {
    const double v = 0.5 * u(gen), heading = kPi * (2 * u(gen) - 1), dt = 0.05 + 0.2 * u(gen);
    const AgentState moved = step(make_state(0, 0, v, heading, 1e-8), {}, kWide, StateNoise{}, rng, {dt, false});
    const Vec2 straight{v * dt * std::cos(heading), v * dt * std::sin(heading)};
    REQUIRE((moved.position - straight).norm() < 1e-5);
  }
}

TEST_CASE("clamp_controls examples") {
  const MotionLimits lim{};
  CHECK(clamp_controls({0, 0}, lim) == ControlInput{0, 0});
  CHECK(clamp_controls({10, 0}, lim) == ControlInput{0.5, 0});
  CHECK(clamp_controls({-0.3, 0.7}, lim) == ControlInput{-0.3, 0.5});
}

TEST_CASE("saturation keeps speed and turn rate in range") {
  const MotionLimits lim{};
  const StateNoise noise = StateNoise::diagonal((StateNoise::Vector5() << 1e-2, 1e-2, 1e-2, 1e-2, 1e-2).finished());
  Rng rng(4);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  AgentState s;
  for (int k = 0; k < 5000; ++k) {
    s = step(s, {u(rng), u(rng)}, lim, noise, rng);
    REQUIRE(s.speed >= 0.0);
    REQUIRE(s.speed <= lim.max_speed);
    REQUIRE(std::abs(s.turn_rate) <= lim.max_turn_rate);
    REQUIRE(s.heading.value() > -kPi);
    REQUIRE(s.heading.value() <= kPi);
  }
}

TEST_CASE("noiseless step is deterministic and leaves the stream alone") {
  Rng a(42), b(42);
  const AgentState s = make_state(1, 2, 0.3, 0.4, 0.1);
  CHECK(step(s, {0.2, -0.1}, MotionLimits{}, StateNoise{}, a) == step(s, {0.2, -0.1}, MotionLimits{}, StateNoise{}, b));
  CHECK(a() == Rng(42)());
}

TEST_CASE("noise sample variances match the covariance diagonal") {
  StateNoise::Vector5 var;
  var << 1e-2, 1e-2, 1e-4, 3.2e-4, 3.2e-6;
  const StateNoise noise = StateNoise::diagonal(var);
  const AgentState s = make_state(0, 0, 0.25, 0.7, 0.0);
  Rng rng(123), unused(0);
  const AgentState clean = step(s, {}, MotionLimits{}, StateNoise{}, unused);
  constexpr int kSamples = 100000;
  StateNoise::Vector5 sum = StateNoise::Vector5::Zero(), sq = StateNoise::Vector5::Zero();
  for (int k = 0; k < kSamples; ++k) {
    const AgentState n = step(s, {}, MotionLimits{}, noise, rng);
    const double h = n.heading.value();
    // Position noise is local: rotate the world offset back by the noisy heading.
    const Vec2 dp = rotate(n.position - clean.position, -h);
    StateNoise::Vector5 w;
    w << dp.x, dp.y, n.speed - clean.speed, wrap_angle(h - clean.heading.value()), n.turn_rate - clean.turn_rate;
    sum += w;
    sq += w.cwiseProduct(w);
  }
  for (int i = 0; i < 5; ++i) {
    const double mean = sum[i] / kSamples;
    const double sample_var = sq[i] / kSamples - mean * mean;
    CAPTURE(i);
    CHECK(std::abs(sample_var / var[i] - 1.0) < 0.05);
  }
}

TEST_CASE("covariance validation") {
  StateNoise::Matrix5 c = StateNoise::Matrix5::Identity();
  c(0, 0) = -1.0;
  CHECK_THROWS_AS(StateNoise{c}, std::invalid_argument);
  c = StateNoise::Matrix5::Identity();
  c(0, 1) = 0.5;
  CHECK_THROWS_AS(StateNoise{c}, std::invalid_argument);
  c(1, 0) = 0.5;
  CHECK_NOTHROW(StateNoise{c});
}
