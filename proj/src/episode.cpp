#include "sfc/episode.hpp"

#include <algorithm>
#include <exception>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace sfc {

using json = nlohmann::ordered_json;

void TrajectoryLog::write_jsonl(std::ostream& os) const {
  for (const TrajectoryRecord& r : records) {
    json j;
    j["step"] = r.step;
    j["agent"] = r.agent;
    j["x"] = r.x;
    j["y"] = r.y;
    j["v"] = r.v;
    j["alpha"] = r.alpha;
    j["omega"] = r.omega;
    j["e_x"] = r.e_x;
    j["e_y"] = r.e_y;
    j["r_tracking"] = r.r_tracking;
    j["r_avoiding"] = r.r_avoiding;
    j["reward"] = r.reward;
    j["collision"] = r.collision;
    os << j.dump() << '\n';
  }
}

TrajectoryLog TrajectoryLog::read_jsonl(std::istream& is) {
  TrajectoryLog log;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    TrajectoryRecord r;
    r.step = j.at("step").get<int>();
    r.agent = j.at("agent").get<int>();
    r.x = j.at("x").get<double>();
    r.y = j.at("y").get<double>();
    r.v = j.at("v").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.omega = j.at("omega").get<double>();
    r.e_x = j.at("e_x").get<double>();
    r.e_y = j.at("e_y").get<double>();
    r.r_tracking = j.at("r_tracking").get<double>();
    r.r_avoiding = j.at("r_avoiding").get<double>();
    r.reward = j.at("reward").get<double>();
    r.collision = j.at("collision").get<bool>();
    log.records.push_back(r);
  }
  return log;
}

EpisodeStats run_episode(FormationEnv& env, FollowerPolicy& policy, std::uint64_t seed,
                         TrajectoryLog* log) {
  env.reset(seed);
  policy.begin_episode(seed);
  EpisodeStats stats;
  stats.seed = seed;
  double error_sum = 0.0;
  const int followers = env.n_followers();

  for (bool done = false; !done;) {
    const StepResult res = env.step(policy.act(env));
    done = res.done;
    ++stats.steps;
    for (const FollowerStep& f : res.followers) {
      error_sum += f.true_error.norm();
      stats.total_cost += f.reward;
    }
    if (res.any_collision) {
      ++stats.collision_steps;
      stats.collided = true;
    }
    if (log) {
      const WorldState& w = env.world();
      for (int i = 0; i <= followers; ++i) {
        const AgentState& s = w.agents[i];
        TrajectoryRecord r{w.step, i, s.position.x, s.position.y, s.speed, s.heading.value(),
                           s.turn_rate};
        if (i > 0) {
          const FollowerStep& f = res.followers[i - 1];
          r.e_x = f.error.x;
          r.e_y = f.error.y;
          r.r_tracking = f.r_tracking;
          r.r_avoiding = f.r_avoiding;
          r.reward = f.reward;
          r.collision = f.collision;
        }
        log->records.push_back(r);
      }
    }
  }
  stats.mean_tracking_error = error_sum / (static_cast<double>(stats.steps) * followers);
  return stats;
}

Metrics summarize(std::string method, std::vector<EpisodeStats> episodes) {
  Metrics m;
  m.method = std::move(method);
  if (!episodes.empty()) {
    double err = 0.0;
    int collided = 0;
    long collision_steps = 0;
    long steps = 0;
    for (const EpisodeStats& e : episodes) {
      err += e.mean_tracking_error;
      collided += e.collided ? 1 : 0;
      collision_steps += e.collision_steps;
      steps += e.steps;
    }
    const double n = static_cast<double>(episodes.size());
    m.tracking_error_m = err / n;
    m.collision_rate_pct = 100.0 * collided / n;
    m.step_collision_rate_pct = steps > 0 ? 100.0 * static_cast<double>(collision_steps) / steps : 0.0;
  }
  m.episodes = std::move(episodes);
  return m;
}

Metrics evaluate(const EnvConfig& cfg, const FollowerPolicy& policy,
                 std::span<const std::uint64_t> seeds, const std::string& method, int workers) {
  std::vector<EpisodeStats> episodes(seeds.size());
  const int n = static_cast<int>(seeds.size());
  workers = std::clamp(workers, 1, std::max(1, n));

  std::vector<std::exception_ptr> errors(workers);
  auto run_range = [&](int worker) {
    try {
      FormationEnv env(cfg);
      std::unique_ptr<FollowerPolicy> local = policy.clone();
      for (int k = worker; k < n; k += workers) episodes[k] = run_episode(env, *local, seeds[k]);
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };
  if (workers == 1) {
    run_range(0);
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(run_range, w);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return summarize(method, std::move(episodes));
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  return seeds;
}

void write_metrics_table(std::ostream& os, std::span<const Metrics> rows) {
  os << "method,tracking_error_m,collision_rate_pct\n";
  for (const Metrics& m : rows) {
    os << m.method << ',' << std::setprecision(17) << m.tracking_error_m << ','
       << m.collision_rate_pct << '\n';
  }
}

}  // namespace sfc
