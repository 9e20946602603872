#include "sfc/config.hpp"

#include <fstream>
#include <functional>
#include <stdexcept>

namespace sfc {

using json = nlohmann::json;

namespace {

struct Field {
  const char* key;
  bool from_paper;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <class T>
Field scalar(const char* key, bool paper, T RunConfig::*member) {
  return {key, paper, [member](const RunConfig& c) { return json(c.*member); },
          [member](RunConfig& c, const json& v) { c.*member = v.get<T>(); }};
}

// Field bound to a member reached through an accessor.
template <class T, class Access>
Field nested(const char* key, bool paper, Access access) {
  return {key, paper,
          [access](const RunConfig& c) { return json(access(const_cast<RunConfig&>(c))); },
          [access](RunConfig& c, const json& v) { access(c) = v.template get<T>(); }};
}

json vec2_list(const std::vector<Vec2>& pts) {
  json out = json::array();
  for (const Vec2& p : pts) out.push_back({p.x, p.y});
  return out;
}

std::vector<Vec2> parse_vec2_list(const json& v) {
  std::vector<Vec2> out;
  for (const json& p : v) {
    if (!p.is_array() || p.size() != 2) throw std::invalid_argument("expected a list of [x, y] pairs");
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(nested<int>("env.n_followers", true, [](RunConfig& c) -> int& { return c.env.n_followers; }));
    f.push_back(nested<double>("env.formation_radius", true, [](RunConfig& c) -> double& { return c.env.formation_radius; }));
    f.push_back({"env.formation_offsets", false,
                 [](const RunConfig& c) { return vec2_list(c.env.formation_offsets); },
                 [](RunConfig& c, const json& v) { c.env.formation_offsets = parse_vec2_list(v); }});
    f.push_back(nested<double>("env.area_size", true, [](RunConfig& c) -> double& { return c.env.area_size; }));
    f.push_back(nested<int>("env.max_obstacles", true, [](RunConfig& c) -> int& { return c.env.max_obstacles; }));
    f.push_back(nested<double>("env.obstacle_radius_min", true, [](RunConfig& c) -> double& { return c.env.obstacle_radius_min; }));
    f.push_back(nested<double>("env.obstacle_radius_max", true, [](RunConfig& c) -> double& { return c.env.obstacle_radius_max; }));
    f.push_back(nested<double>("env.spawn_clearance", false, [](RunConfig& c) -> double& { return c.env.spawn_clearance; }));
    f.push_back(nested<int>("env.episode_steps", true, [](RunConfig& c) -> int& { return c.env.episode_steps; }));
    f.push_back(nested<double>("env.dt", true, [](RunConfig& c) -> double& { return c.env.dt; }));
    f.push_back(nested<double>("env.agent_size", true, [](RunConfig& c) -> double& { return c.env.agent_size; }));
    f.push_back(nested<double>("env.follower.max_speed", true, [](RunConfig& c) -> double& { return c.env.follower_limits.max_speed; }));
    f.push_back(nested<double>("env.follower.max_turn_rate", true, [](RunConfig& c) -> double& { return c.env.follower_limits.max_turn_rate; }));
    f.push_back(nested<double>("env.follower.max_accel", false, [](RunConfig& c) -> double& { return c.env.follower_limits.max_accel; }));
    f.push_back(nested<double>("env.follower.max_angular_accel", false, [](RunConfig& c) -> double& { return c.env.follower_limits.max_angular_accel; }));
    f.push_back(nested<double>("env.navigator.max_speed", true, [](RunConfig& c) -> double& { return c.env.navigator_limits.max_speed; }));
    f.push_back(nested<double>("env.navigator.max_turn_rate", true, [](RunConfig& c) -> double& { return c.env.navigator_limits.max_turn_rate; }));
    f.push_back(nested<double>("env.navigator.max_accel", false, [](RunConfig& c) -> double& { return c.env.navigator_limits.max_accel; }));
    f.push_back(nested<double>("env.navigator.max_angular_accel", false, [](RunConfig& c) -> double& { return c.env.navigator_limits.max_angular_accel; }));
    f.push_back({"env.navigator.mode", false,
                 [](const RunConfig& c) {
                   return json(c.env.navigator.mode == NavigatorMode::straight ? "straight" : "waypoints");
                 },
                 [](RunConfig& c, const json& v) {
                   const auto s = v.get<std::string>();
                   if (s == "straight") c.env.navigator.mode = NavigatorMode::straight;
                   else if (s == "waypoints") c.env.navigator.mode = NavigatorMode::waypoints;
                   else throw std::invalid_argument("expected 'straight' or 'waypoints'");
                 }});
    f.push_back(nested<double>("env.navigator.cruise_speed", true, [](RunConfig& c) -> double& { return c.env.navigator.cruise_speed; }));
    f.push_back(nested<double>("env.navigator.initial_heading", false, [](RunConfig& c) -> double& { return c.env.navigator.initial_heading; }));
    f.push_back({"env.navigator.waypoints", false,
                 [](const RunConfig& c) { return vec2_list(c.env.navigator.waypoints); },
                 [](RunConfig& c, const json& v) { c.env.navigator.waypoints = parse_vec2_list(v); }});
    f.push_back(nested<double>("env.navigator.waypoint_tolerance", false, [](RunConfig& c) -> double& { return c.env.navigator.waypoint_tolerance; }));
    f.push_back(nested<double>("env.navigator.heading_gain", false, [](RunConfig& c) -> double& { return c.env.navigator.heading_gain; }));
    f.push_back({"env.state_noise", true,
                 [](const RunConfig& c) {
                   const auto& n = c.env.state_noise_variances;
                   return json{n[0], n[1], n[2], n[3], n[4]};
                 },
                 [](RunConfig& c, const json& v) {
                   if (!v.is_array() || v.size() != 5) throw std::invalid_argument("expected 5 variances");
                   for (int i = 0; i < 5; ++i) c.env.state_noise_variances[i] = v[i].get<double>();
                 }});
    f.push_back(nested<bool>("env.navigator_noise", false, [](RunConfig& c) -> bool& { return c.env.navigator_noise; }));
    f.push_back(nested<bool>("env.paper_literal_dy", false, [](RunConfig& c) -> bool& { return c.env.paper_literal_dy; }));
    f.push_back({"env.lidar.resolution_deg", true,
                 [](const RunConfig& c) { return json(c.env.lidar.resolution * 180.0 / kPi); },
                 [](RunConfig& c, const json& v) { c.env.lidar.resolution = v.get<double>() * kPi / 180.0; }});
    f.push_back(nested<double>("env.lidar.d_min", false, [](RunConfig& c) -> double& { return c.env.lidar.d_min; }));
    f.push_back(nested<double>("env.lidar.d_max", true, [](RunConfig& c) -> double& { return c.env.lidar.d_max; }));
    f.push_back(nested<double>("env.lidar.noise_std", true, [](RunConfig& c) -> double& { return c.env.lidar.noise_std; }));
    f.push_back(nested<bool>("env.agents_visible_to_lidar", false, [](RunConfig& c) -> bool& { return c.env.agents_visible_to_lidar; }));
    f.push_back(nested<double>("env.connection_radius", true, [](RunConfig& c) -> double& { return c.env.connection_radius; }));
    f.push_back(nested<double>("env.stream.flow_strength", false, [](RunConfig& c) -> double& { return c.env.stream.flow_strength; }));
    f.push_back(nested<double>("env.stream.d_risk", true, [](RunConfig& c) -> double& { return c.env.stream.d_risk; }));
    f.push_back(nested<double>("env.stream.d_stop", true, [](RunConfig& c) -> double& { return c.env.stream.d_stop; }));
    f.push_back(nested<double>("env.stream.max_cylinder_radius", false, [](RunConfig& c) -> double& { return c.env.stream.max_cylinder_radius; }));
    f.push_back(nested<double>("env.apf_gain", false, [](RunConfig& c) -> double& { return c.env.apf_gain; }));
    f.push_back({"env.avoidance_cost", true,
                 [](const RunConfig& c) { return json(std::string(to_string(c.env.avoidance_cost))); },
                 [](RunConfig& c, const json& v) { c.env.avoidance_cost = parse_avoidance_method(v.get<std::string>()); }});
    f.push_back({"env.tracking_weight", false,
                 [](const RunConfig& c) {
                   const auto& q = c.env.tracking_weight;
                   return json{{q(0, 0), q(0, 1)}, {q(1, 0), q(1, 1)}};
                 },
                 [](RunConfig& c, const json& v) {
                   if (!v.is_array() || v.size() != 2 || v[0].size() != 2 || v[1].size() != 2) {
                     throw std::invalid_argument("expected a 2x2 matrix");
                   }
                   for (int r = 0; r < 2; ++r)
                     for (int k = 0; k < 2; ++k) c.env.tracking_weight(r, k) = v[r][k].get<double>();
                 }});
    f.push_back(nested<std::vector<int>>("ddpg.hidden", true, [](RunConfig& c) -> std::vector<int>& { return c.ddpg.hidden; }));
    f.push_back(nested<double>("ddpg.critic_lr", true, [](RunConfig& c) -> double& { return c.ddpg.critic_lr; }));
    f.push_back(nested<double>("ddpg.actor_lr", true, [](RunConfig& c) -> double& { return c.ddpg.actor_lr; }));
    f.push_back(nested<int>("ddpg.batch_size", true, [](RunConfig& c) -> int& { return c.ddpg.batch_size; }));
    f.push_back(nested<double>("ddpg.gamma", false, [](RunConfig& c) -> double& { return c.ddpg.gamma; }));
    f.push_back(nested<double>("ddpg.tau", false, [](RunConfig& c) -> double& { return c.ddpg.tau; }));
    f.push_back(nested<std::size_t>("ddpg.buffer_capacity", false, [](RunConfig& c) -> std::size_t& { return c.ddpg.buffer_capacity; }));
    f.push_back(nested<double>("ddpg.sigma_start", false, [](RunConfig& c) -> double& { return c.ddpg.sigma_start; }));
    f.push_back(nested<double>("ddpg.sigma_end", false, [](RunConfig& c) -> double& { return c.ddpg.sigma_end; }));
    f.push_back(nested<double>("ddpg.sigma_anneal_fraction", false, [](RunConfig& c) -> double& { return c.ddpg.sigma_anneal_fraction; }));
    f.push_back(nested<int>("ddpg.updates_per_step", false, [](RunConfig& c) -> int& { return c.ddpg.updates_per_step; }));
    f.push_back(nested<double>("ddpg.reward_scale", false, [](RunConfig& c) -> double& { return c.ddpg.reward_scale; }));
    f.push_back(scalar("train.episodes", true, &RunConfig::train_episodes));
    f.push_back(scalar("train.checkpoint_every", false, &RunConfig::checkpoint_every));
    f.push_back(scalar("eval.episodes", true, &RunConfig::eval_episodes));
    f.push_back(scalar("eval.episode_steps", true, &RunConfig::eval_episode_steps));
    f.push_back(scalar("eval.seed_base", false, &RunConfig::eval_seed_base));
    f.push_back(scalar("run.seed", false, &RunConfig::seed));
    f.push_back(scalar("run.workers", false, &RunConfig::workers));
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const Field& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

// An echo entry looks like {"value": ..., "origin": ...}.
bool is_echo_entry(const json& v) {
  return v.is_object() && v.contains("value") && v.contains("origin") && v.size() == 2;
}

void flatten(const json& doc, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.value().is_object() && !is_echo_entry(it.value())) {
      flatten(it.value(), key, out);
    } else {
      out.emplace_back(key, is_echo_entry(it.value()) ? it.value()["value"] : it.value());
    }
  }
}

const char* origin_name(ValueOrigin o) {
  switch (o) {
    case ValueOrigin::paper: return "paper";
    case ValueOrigin::fallback: return "default";
    case ValueOrigin::config: return "config";
    case ValueOrigin::override_: return "override";
  }
  return "default";
}

}  // namespace

EnvConfig RunConfig::eval_env() const {
  EnvConfig e = env;
  e.episode_steps = eval_episode_steps;
  return e;
}

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> v = env.violations();
  for (auto& s : ddpg.violations()) v.push_back(std::move(s));
  if (train_episodes < 0) v.emplace_back("train.episodes must be >= 0");
  if (checkpoint_every < 0) v.emplace_back("train.checkpoint_every must be >= 0");
  if (eval_episodes < 1) v.emplace_back("eval.episodes must be >= 1");
  if (eval_episode_steps < 1) v.emplace_back("eval.episode_steps must be >= 1");
  if (workers < 1) v.emplace_back("run.workers must be >= 1");
  return v;
}

ConfigBuilder::ConfigBuilder() {
  for (const Field& f : fields()) origins_[f.key] = f.from_paper ? ValueOrigin::paper : ValueOrigin::fallback;
}

std::vector<std::string> ConfigBuilder::keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.emplace_back(f.key);
  return out;
}

void ConfigBuilder::set(const std::string& key, const json& value, ValueOrigin origin) {
  const Field* f = find_field(key);
  if (!f) {
    load_errors_.push_back("unknown config key '" + key + "'");
    return;
  }
  try {
    f->set(cfg_, value);
    origins_[key] = origin;
  } catch (const std::exception& e) {
    load_errors_.push_back("bad value for '" + key + "': " + e.what());
  }
}

void ConfigBuilder::apply_document(const json& doc) {
  if (!doc.is_object()) {
    load_errors_.emplace_back("config document must be a JSON object");
    return;
  }
  std::vector<std::pair<std::string, json>> flat;
  flatten(doc, "", flat);
  for (const auto& [key, value] : flat) {
    set(key, value, ValueOrigin::config);
  }
}

void ConfigBuilder::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    load_errors_.push_back("override '" + assignment + "' is not of the form key=value");
    return;
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  set(key, value, ValueOrigin::override_);
  override_log_.push_back(key + "=" + value.dump());
}

std::vector<std::string> ConfigBuilder::problems() const {
  std::vector<std::string> out = load_errors_;
  for (auto& v : cfg_.violations()) out.push_back(std::move(v));
  return out;
}

nlohmann::ordered_json ConfigBuilder::echo() const {
  nlohmann::ordered_json out;
  for (const Field& f : fields()) {
    out[f.key] = {{"value", f.get(cfg_)}, {"origin", origin_name(origins_.at(f.key))}};
  }
  return out;
}

ConfigBuilder load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
  ConfigBuilder builder;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw std::runtime_error("config file '" + path + "' is not valid JSON");
    builder.apply_document(doc);
  }
  for (const auto& o : overrides) builder.apply_override(o);
  if (auto problems = builder.problems(); !problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw std::runtime_error(msg);
  }
  return builder;
}

}  // namespace sfc
