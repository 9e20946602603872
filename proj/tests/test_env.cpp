#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sfc/episode.hpp"

using namespace sfc;

namespace {

EnvConfig quiet_config(int followers = 4) {
  EnvConfig cfg;
  cfg.n_followers = followers;
  cfg.state_noise_variances.setZero();
  cfg.lidar.noise_std = 0.0;
  return cfg;
}

std::vector<ControlInput> zeros(int n) { return std::vector<ControlInput>(n); }

}  // namespace

TEST_CASE("reset is deterministic and places agents on their slots") {
  FormationEnv a(EnvConfig{}), b(EnvConfig{});
  const auto oa = a.reset(77);
  const auto ob = b.reset(77);
  CHECK(oa == ob);
  REQUIRE(a.world().obstacles.size() == b.world().obstacles.size());
  for (std::size_t k = 0; k < a.world().obstacles.size(); ++k) {
    CHECK(a.world().obstacles[k].center == b.world().obstacles[k].center);
    CHECK(a.world().obstacles[k].radius == b.world().obstacles[k].radius);
  }
  const WorldState& w = a.world();
  CHECK(w.agents[0].position == Vec2{0, 0});
  for (int i = 1; i <= 4; ++i) CHECK(w.agents[i].position == w.agents[0].position + a.formation().offsets[i - 1]);
}

TEST_CASE("obstacle sampling law") {
  FormationEnv env(EnvConfig{});
  double sum = 0.0;
  long count = 0;
  std::vector<int> histogram(6, 0);
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    env.reset(seed);
    const auto& obs = env.world().obstacles;
    ++histogram[obs.size()];
    for (const Circle& c : obs) {
      sum += c.radius;
      ++count;
      REQUIRE(c.radius >= 0.1);
      REQUIRE(c.radius <= 0.5);
      REQUIRE(std::abs(c.center.x) <= 7.0);
      REQUIRE(std::abs(c.center.y) <= 7.0);
      for (const AgentState& s : env.world().agents) REQUIRE((c.center - s.position).norm() >= 1.0 + c.radius);
    }
  }
  CHECK(sum / count == doctest::Approx(0.3).epsilon(0.02));
  for (int n : histogram) CHECK(n == doctest::Approx(10000.0 / 6.0).epsilon(0.1));
}

TEST_CASE("crowded area fails after bounded retries") {
  EnvConfig cfg;
  cfg.area_size = 2.0;
  cfg.max_obstacles = 5;
  FormationEnv env(cfg);
  bool threw = false;
  for (std::uint64_t seed = 0; seed < 20 && !threw; ++seed) {
    try {
      env.reset(seed);
    } catch (const std::runtime_error&) {
      threw = true;
    }
  }
  CHECK(threw);
}

TEST_CASE("navigator scripts") {
  EnvConfig cfg = quiet_config(1);
  cfg.max_obstacles = 0;
  FormationEnv env(cfg);
  env.reset(1);
  double path = 0.0;
  const int steps = 200;
  for (int k = 0; k < steps; ++k) {
    const Vec2 before = env.world().agents[0].position;
    env.step(zeros(1));
    CHECK(env.world().agents[0].turn_rate == 0.0);
    path += (env.world().agents[0].position - before).norm();
  }
  CHECK(path <= 0.35 * steps * cfg.dt + 1e-12);

  cfg.navigator.mode = NavigatorMode::waypoints;
  cfg.navigator.waypoints = {{2.0, 0.0}, {2.0, 5.0}};
  FormationEnv turning(cfg);
  turning.reset(1);
  bool turned = false;
  for (int k = 0; k < 300; ++k) {
    turning.step(zeros(1));
    const AgentState& nav = turning.world().agents[0];
    REQUIRE(std::abs(nav.turn_rate) <= 0.06);
    REQUIRE(nav.speed <= 0.35);
    turned = turned || nav.turn_rate > 0.0;
  }
  CHECK(turned);
  CHECK(turning.world().waypoint_index == 1);
}

TEST_CASE("static world gives constant rewards") {
  EnvConfig cfg = quiet_config(2);
  cfg.navigator.cruise_speed = 0.0;
  FormationEnv env(cfg);
  env.reset_with_obstacles(3, {{{1.0, 2.4}, 0.3}, {{-3.0, -3.0}, 0.4}});
  const StepResult first = env.step(zeros(2));
  for (int k = 0; k < 20; ++k) {
    const StepResult next = env.step(zeros(2));
    for (int i = 0; i < 2; ++i) CHECK(next.followers[i].reward == first.followers[i].reward);
  }
}

TEST_CASE("follower on its slot has zero tracking cost") {
  FormationEnv env(quiet_config(3));
  env.reset_with_obstacles(0, {});
  const StepResult now = env.sense();
  for (const FollowerStep& f : now.followers) {
    CHECK(f.r_tracking < 1e-24);
    CHECK(f.true_error.norm() < 1e-15);
  }
}

TEST_CASE("head-on collision at the predicted step") {
  EnvConfig cfg = quiet_config(1);
  FormationEnv env(cfg);
  const Vec2 slot = env.formation().offsets[0];
  const Circle obstacle{{slot.x + 1.0, slot.y}, 0.2};
  env.reset_with_obstacles(0, {obstacle});
  env.mutable_world().agents[1].speed = 0.5;
  env.sense();
  const double gap = 1.0 - obstacle.radius - cfg.agent_radius();
  const int predicted = static_cast<int>(std::ceil(gap / (0.5 * cfg.dt)));
  int hit_at = -1;
  for (int k = 1; k <= 40 && hit_at < 0; ++k) {
    const StepResult r = env.step(zeros(1));
    if (r.followers[0].collision) hit_at = k;
  }
  CHECK(hit_at == predicted);
  CHECK(env.world().agents[1].speed == 0.0);
}

TEST_CASE("followers collide with each other") {
  EnvConfig cfg = quiet_config(2);
  cfg.formation_offsets = {{0.0, 1.0}, {0.0, 1.1}};
  FormationEnv env(cfg);
  env.reset_with_obstacles(0, {});
  const StepResult r = env.step(zeros(2));
  CHECK(r.followers[0].collision);
  CHECK(r.followers[1].collision);
}

TEST_CASE("observation layout is fixed and uses sentinels") {
  EnvConfig cfg;
  FormationEnv env(cfg);
  const auto obs = env.reset(5);
  const ObservationLayout& lay = env.layout();
  CHECK(lay.size() == 5 + 2 * 4 + 12 + 6);
  for (const auto& o : obs) CHECK(static_cast<int>(o.size()) == lay.size());
  for (int k = 0; k < 30; ++k) {
    const StepResult r = env.step(zeros(4));
    for (const auto& o : r.observations) REQUIRE(static_cast<int>(o.size()) == lay.size());
  }

  FormationEnv empty(quiet_config(4));
  const auto clear = empty.reset_with_obstacles(0, {});
  for (Side s : {Side::left, Side::right}) {
    for (int k = 0; k < 3; ++k) {
      CHECK(clear[0][lay.sensor_offset(s) + 2 * k] == 2.0);
      CHECK(clear[0][lay.sensor_offset(s) + 2 * k + 1] == 0.0);
    }
    for (int k = 0; k < 3; ++k) CHECK(clear[0][lay.cylinder_offset(s) + k] == 0.0);
  }
}

TEST_CASE("disconnected neighbors fill their slots with the sentinel") {
  EnvConfig cfg = quiet_config(2);
  cfg.formation_offsets = {{0.0, 3.0}, {0.0, -9.0}};
  FormationEnv env(cfg);
  const auto obs = env.reset_with_obstacles(0, {});
  const int slot_other = ObservationLayout::kNeighbors + 2;  // slots: navigator, follower 2
  CHECK(obs[0][ObservationLayout::kNeighbors] == doctest::Approx(3.0));
  CHECK(obs[0][slot_other] == 2.0);
  CHECK(obs[0][slot_other + 1] == 0.0);
}

TEST_CASE("followers step from one snapshot") {
  EnvConfig a_cfg = quiet_config(2);
  a_cfg.formation_offsets = {{0.0, 2.0}, {0.0, -2.0}};
  EnvConfig b_cfg = a_cfg;
  b_cfg.formation_offsets = {{0.0, -2.0}, {0.0, 2.0}};
  FormationEnv a(a_cfg), b(b_cfg);
  const ObstacleSet world{{{1.2, 2.1}, 0.3}, {{1.0, -1.7}, 0.2}};
  a.reset_with_obstacles(0, world);
  b.reset_with_obstacles(0, world);
  for (int k = 0; k < 60; ++k) {
    const ControlInput u1{0.4, 0.3 * std::sin(0.1 * k)}, u2{0.2, -0.2};
    a.step({u1, u2});
    b.step({u2, u1});
    REQUIRE(a.world().agents[1] == b.world().agents[2]);
    REQUIRE(a.world().agents[2] == b.world().agents[1]);
  }
}

TEST_CASE("rewards decompose and trajectory logs replay") {
  EnvConfig cfg;
  cfg.n_followers = 3;
  cfg.episode_steps = 120;
  FormationEnv env(cfg);
  RandomPolicy policy(4);
  TrajectoryLog log;
  const EpisodeStats stats = run_episode(env, policy, 9, &log);
  CHECK(log.records.size() == static_cast<std::size_t>(120 * 4));
  CHECK(stats.steps == 120);

  const TrackingWeight q(cfg.tracking_weight);
  double total = 0.0;
  for (const TrajectoryRecord& r : log.records) {
    REQUIRE(r.reward == r.r_tracking + r.r_avoiding);
    if (r.agent == 0) continue;
    REQUIRE(r.r_tracking == tracking_cost({r.e_x, r.e_y}, q));
    total += r.reward;
  }
  CHECK(total == doctest::Approx(stats.total_cost).epsilon(1e-12));

  // Replay the same episode and recompute the avoidance cost from the sensed state.
  FormationEnv replay(cfg);
  RandomPolicy again(4);
  replay.reset(9);
  again.begin_episode(9);
  for (int k = 0; k < 120; ++k) {
    replay.step(again.act(replay));
    for (int i = 1; i <= 3; ++i) {
      const TrajectoryRecord& r = log.records[k * 4 + i];
      REQUIRE(r.r_avoiding == avoidance_cost(replay.world().detections[i].sides, cfg.stream.d_risk));
    }
  }

  std::stringstream ss;
  log.write_jsonl(ss);
  const TrajectoryLog back = TrajectoryLog::read_jsonl(ss);
  CHECK(back.records == log.records);
}

TEST_CASE("apf costs replace the stream cost") {
  EnvConfig cfg = quiet_config(1);
  FormationEnv stream_env(cfg);
  cfg.avoidance_cost = AvoidanceMethod::apf_risk;
  FormationEnv apf_env(cfg);
  const Vec2 slot = stream_env.formation().offsets[0];
  const ObstacleSet world{{{slot.x + 0.6, slot.y + 0.1}, 0.2}};
  stream_env.reset_with_obstacles(0, world);
  apf_env.reset_with_obstacles(0, world);
  const StepResult s = apf_env.sense();
  stream_env.sense();
  const AvoidanceUpdate& det = apf_env.world().detections[1];
  CHECK(s.followers[0].r_avoiding == apf_cost(det, ApfParams{cfg.stream.d_risk, cfg.apf_gain}));
  CHECK(s.followers[0].r_avoiding > 0.0);
  CHECK(apf_env.observations() == stream_env.observations());
}

TEST_CASE("evaluation metrics") {
  EnvConfig cfg = quiet_config(2);
  cfg.max_obstacles = 0;
  cfg.episode_steps = 150;

  const auto seeds = seed_range(100, 3);
  const Metrics tracked = evaluate(cfg, FormationTrackerPolicy{}, seeds, "tracker");
  CHECK(tracked.tracking_error_m < 0.05);
  CHECK(tracked.collision_rate_pct == 0.0);

  // Stationary followers: the error is the navigator's displacement.
  FormationEnv env(cfg);
  StandStillPolicy still;
  TrajectoryLog log;
  const EpisodeStats stats = run_episode(env, still, 1, &log);
  double sum = 0.0;
  double prev = 0.0;
  for (const TrajectoryRecord& r : log.records) {
    if (r.agent != 0) continue;
    const double displacement = std::hypot(r.x, r.y);
    sum += displacement;
    if (r.step > 10) REQUIRE(displacement - prev == doctest::Approx(0.35 * cfg.dt).epsilon(1e-9));
    prev = displacement;
  }
  CHECK(stats.mean_tracking_error == doctest::Approx(sum / cfg.episode_steps).epsilon(1e-12));

  const Metrics one = evaluate(cfg, still, seed_range(1, 1), "still");
  CHECK(one.tracking_error_m == stats.mean_tracking_error);
  CHECK(one.episodes.front() == stats);
}

TEST_CASE("evaluation is deterministic across worker counts") {
  EnvConfig cfg;
  cfg.episode_steps = 60;
  const auto seeds = seed_range(10, 5);
  const Metrics a = evaluate(cfg, RandomPolicy{}, seeds, "random", 1);
  const Metrics b = evaluate(cfg, RandomPolicy{}, seeds, "random", 1);
  const Metrics c = evaluate(cfg, RandomPolicy{}, seeds, "random", 3);
  CHECK(a == b);
  CHECK(a == c);
  CHECK(a.collision_rate_pct >= 0.0);
  CHECK(a.collision_rate_pct <= 100.0);

  std::ostringstream os;
  const Metrics rows[1] = {a};
  write_metrics_table(os, rows);
  CHECK(os.str().rfind("method,tracking_error_m,collision_rate_pct\nrandom,", 0) == 0);
}
