#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sfc/env.hpp"
#include "sfc/policy.hpp"

namespace sfc {

/// One agent at one step. Navigator rows carry zero costs.
struct TrajectoryRecord {
  int step = 0;
  int agent = 0;
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
  double alpha = 0.0;
  double omega = 0.0;
  double e_x = 0.0;
  double e_y = 0.0;
  double r_tracking = 0.0;
  double r_avoiding = 0.0;
  double reward = 0.0;
  bool collision = false;

  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

/// Line-delimited JSON trajectory log, one object per record.
struct TrajectoryLog {
  std::vector<TrajectoryRecord> records;

  void write_jsonl(std::ostream& os) const;
  static TrajectoryLog read_jsonl(std::istream& is);
};

struct EpisodeStats {
  std::uint64_t seed = 0;
  int steps = 0;
  double mean_tracking_error = 0.0;  // mean over steps and followers of |e|
  double total_cost = 0.0;           // summed reward over steps and followers
  int collision_steps = 0;           // steps with at least one collision
  bool collided = false;

  friend bool operator==(const EpisodeStats&, const EpisodeStats&) = default;
};

/// Runs one full episode of `policy` from reset(seed).
EpisodeStats run_episode(FormationEnv& env, FollowerPolicy& policy, std::uint64_t seed,
                         TrajectoryLog* log = nullptr);

struct Metrics {
  std::string method;
  double tracking_error_m = 0.0;
  double collision_rate_pct = 0.0;       // episodes with >= 1 collision
  double step_collision_rate_pct = 0.0;  // steps with >= 1 collision
  std::vector<EpisodeStats> episodes;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Aggregates per-episode statistics; episodes keep their given order.
Metrics summarize(std::string method, std::vector<EpisodeStats> episodes);

/// Evaluates `policy` on every seed. `workers` > 1 runs episodes on threads;
/// results do not depend on the worker count.
Metrics evaluate(const EnvConfig& cfg, const FollowerPolicy& policy,
                 std::span<const std::uint64_t> seeds, const std::string& method, int workers = 1);

/// Seeds base, base + 1, ...
std::vector<std::uint64_t> seed_range(std::uint64_t base, int count);

/// "method,tracking_error_m,collision_rate_pct" table.
void write_metrics_table(std::ostream& os, std::span<const Metrics> rows);

}  // namespace sfc
