#include <doctest.h>

#include <cmath>
#include <random>

#include "sfc/action.hpp"
#include "sfc/apf.hpp"
#include "sfc/formation.hpp"

using namespace sfc;

TEST_CASE("relative_displacement examples") {
  const Vec2 zero = relative_displacement(0.0, 1.234);
  CHECK(zero.x == 0.0);
  CHECK(zero.y == 0.0);
  const Vec2 up = relative_displacement(2.0, kPi / 2);
  CHECK(std::abs(up.x) < 1e-15);
  CHECK(up.y == 2.0);
  const Vec2 z = relative_displacement(1.5, kPi / 6);
  CHECK(z.x == doctest::Approx(1.5 * std::sqrt(3.0) / 2.0));
  CHECK(z.y == doctest::Approx(0.75));
}

TEST_CASE("tracking_error") {
  CHECK(tracking_error({1, 1}, {1, 1}) == Vec2{0, 0});
  CHECK(tracking_error({1, 1}, {1, 0}) == Vec2{0, 1});

  // Broadcast reconstruction agrees with world positions.
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p0{u(gen), u(gen)}, pi{u(gen), u(gen)}, eta{u(gen), u(gen)};
    const Vec2 d = pi - p0;
    const Vec2 e7 = tracking_error(relative_displacement(d.norm(), std::atan2(d.y, d.x)), eta);
    const Vec2 e6 = pi - p0 - eta;
    REQUIRE((e7 - e6).norm() < 1e-12 * (1.0 + d.norm()));
  }
}

TEST_CASE("tracking_cost") {
  const TrackingWeight id;
  CHECK(tracking_cost({0, 0}, id) == 0.0);
  CHECK(tracking_cost({3, 4}, id) == 25.0);

  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(gen), b = u(gen);
    Eigen::Matrix2d l;
    l << 0.2 + std::abs(a), 0.0, b, 0.2 + std::abs(u(gen));
    const Eigen::Matrix2d q = l * l.transpose();
    const Vec2 e{u(gen), u(gen)};
    const double expanded = q(0, 0) * e.x * e.x + (q(0, 1) + q(1, 0)) * e.x * e.y + q(1, 1) * e.y * e.y;
    const double cost = tracking_cost(e, TrackingWeight(q));
    REQUIRE(cost == doctest::Approx(expanded).epsilon(1e-12));
    if (e.norm() > 0.0) REQUIRE(cost > 0.0);
  }
}

TEST_CASE("tracking weight must be positive definite") {
  Eigen::Matrix2d q;
  q << 1, 0, 0, -1;
  CHECK_THROWS_AS(TrackingWeight{q}, std::invalid_argument);
  q << 1, 2, 2, 1;
  CHECK_THROWS_AS(TrackingWeight{q}, std::invalid_argument);
  q << 1, 0.5, 0.2, 1;
  CHECK_THROWS_AS(TrackingWeight{q}, std::invalid_argument);
  q << 2, 0.5, 0.5, 1;
  CHECK_NOTHROW(TrackingWeight{q});
}

TEST_CASE("formation shapes") {
  const FormationSpec circle = FormationSpec::circle(4, 2.1);
  REQUIRE(circle.offsets.size() == 4);
  CHECK(circle.offsets[0].y == doctest::Approx(2.1));
  for (const Vec2& o : circle.offsets) CHECK(o.norm() == doctest::Approx(2.1));
  CHECK_NOTHROW(circle.validate());
  FormationSpec dup{{{1, 0}, {1, 0}}};
  CHECK_THROWS(dup.validate());
  const FormationSpec polar = FormationSpec::from_polar({2.0, 1.0}, {0.0, kPi});
  CHECK(polar.offsets[1].x == doctest::Approx(-1.0));
}

TEST_CASE("apf examples") {
  const ApfParams p{0.7, 1.0};
  CHECK(apf_term(0.7, p) == 0.0);
  CHECK(apf_term(1.5, p) == 0.0);
  CHECK(apf_term(0.35, p) == doctest::Approx(1.0 / (2.0 * 0.7 * 0.7)));
  const ApfParams q{0.4, 2.5};
  CHECK(apf_term(0.2, q) == doctest::Approx(2.5 / (2.0 * 0.4 * 0.4)));
  CHECK_THROWS_AS(apf_term(0.0, p), std::invalid_argument);
  const double both[2] = {0.35, 0.5};
  CHECK(apf_cost(both, p) == doctest::Approx(apf_term(0.35, p) + apf_term(0.5, p)));
}

TEST_CASE("apf is decreasing and continuous at the cutoff") {
  const ApfParams p{0.4, 1.0};
  double prev = apf_term(0.01, p);
  for (double d = 0.02; d < 0.4; d += 0.01) {
    const double c = apf_term(d, p);
    REQUIRE(c < prev);
    prev = c;
  }
  CHECK(apf_term(0.4 - 1e-9, p) < 1e-15);
}

TEST_CASE("avoidance method names") {
  for (auto m : {AvoidanceMethod::stream, AvoidanceMethod::apf_risk, AvoidanceMethod::apf_stop}) {
    CHECK(parse_avoidance_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_avoidance_method("vortex"), std::invalid_argument);
}

TEST_CASE("map_action examples") {
  const MotionLimits lim{0.5, 0.2, 0.5, 0.5};
  CHECK(map_action({1, 0, 0}, lim) == ControlInput{0.5, 0.0});
  CHECK(map_action({0, 0.5, 0.5}, lim) == ControlInput{0.0, 0.0});
  const ControlInput c = map_action({0.2, 0.7, 0.1}, lim);
  CHECK(c.accel == doctest::Approx(0.1));
  CHECK(c.angular_accel == doctest::Approx(0.3));
}
