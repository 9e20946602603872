#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sfc/ddpg.hpp"
#include "sfc/env.hpp"

namespace sfc {

/// Every tunable of a train / eval / rollout run.
struct RunConfig {
  EnvConfig env;
  DdpgConfig ddpg;
  int train_episodes = 30000;
  int checkpoint_every = 0;  // episodes between periodic checkpoints, 0 = final only
  int eval_episodes = 100;
  int eval_episode_steps = 2500;
  std::uint64_t eval_seed_base = 1'000'000;
  std::uint64_t seed = 0;
  int workers = 1;

  /// Environment used for evaluation and rollouts (longer episodes).
  EnvConfig eval_env() const;
  std::vector<std::string> violations() const;
};

enum class ValueOrigin { paper, fallback, config, override_ };

/// Loads flat ("env.dt") or nested ({"env": {"dt": ...}}) JSON onto a
/// RunConfig and records where each value came from. Echo files written by
/// `echo()` load back to the same configuration.
class ConfigBuilder {
 public:
  ConfigBuilder();

  /// Applies every key of `doc`; problems are collected, not thrown.
  void apply_document(const nlohmann::json& doc);
  /// Applies one "key=value" override; the value is parsed as JSON, falling
  /// back to a plain string.
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const nlohmann::json& value, ValueOrigin origin);

  const RunConfig& config() const { return cfg_; }
  RunConfig& mutable_config() { return cfg_; }
  /// Load errors followed by constraint violations.
  std::vector<std::string> problems() const;
  const std::vector<std::string>& overrides() const { return override_log_; }

  /// {key: {"value": ..., "origin": "paper" | "default" | "config" | "override"}}
  nlohmann::ordered_json echo() const;

  static std::vector<std::string> keys();

 private:
  RunConfig cfg_;
  std::map<std::string, ValueOrigin> origins_;
  std::vector<std::string> load_errors_;
  std::vector<std::string> override_log_;
};

/// Reads a JSON config file and applies overrides; throws std::runtime_error
/// listing every problem if the result is invalid.
ConfigBuilder load_run_config(const std::string& path, const std::vector<std::string>& overrides);

}  // namespace sfc
