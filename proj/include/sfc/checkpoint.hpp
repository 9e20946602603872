#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "sfc/ddpg.hpp"

namespace sfc {

/// Network weights plus enough bookkeeping to resume or deploy a run.
struct Checkpoint {
  Mlp actor;
  Mlp critic;
  Mlp actor_target;
  Mlp critic_target;
  long train_steps = 0;
  int episodes_done = 0;
  int obs_dim = 0;
  nlohmann::ordered_json config;  // echo of the run configuration
};

Checkpoint make_checkpoint(const DdpgAgent& agent, int episodes_done, nlohmann::ordered_json config);

nlohmann::ordered_json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::ordered_json& doc);

/// Writes to a temporary file next to `path` and renames it into place.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Writes `text` to `path` atomically (temporary file, then rename).
void write_file_atomic(const std::string& path, const std::string& text);

}  // namespace sfc
