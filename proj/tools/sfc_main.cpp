// sfc: train, evaluate and roll out formation-control policies.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sfc/checkpoint.hpp"
#include "sfc/config.hpp"
#include "sfc/episode.hpp"
#include "sfc/trainer.hpp"

namespace fs = std::filesystem;
using namespace sfc;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitInvalid = 2;

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<int> workers;
  std::optional<int> episodes;
  std::optional<std::string> method;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "JSON config file (flat dotted keys or nested)");
  cmd->add_option("--seed", a.seed, "Run seed");
  cmd->add_option("--out", a.out, "Output directory");
  cmd->add_option("--workers", a.workers, "Parallel rollout workers")->check(CLI::PositiveNumber);
  cmd->add_option("--episodes", a.episodes, "Episode count")->check(CLI::NonNegativeNumber);
  cmd->add_option("--method", a.method, "Avoidance cost")
      ->check(CLI::IsMember({"stream", "apf_risk", "apf_stop"}));
  cmd->add_option("--set", a.overrides, "Override one config key: key=value");
}

// Builds the effective configuration: optional base document (a checkpoint's
// echo), then the config file, then flag-derived and --set overrides.
ConfigBuilder build_config(const CommonArgs& a, const nlohmann::json* base,
                           const std::vector<std::string>& flag_overrides) {
  ConfigBuilder b;
  if (base && !base->empty()) b.apply_document(*base);
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw InvalidInput("cannot open config file '" + a.config + "'");
    const nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw InvalidInput("config file '" + a.config + "' is not valid JSON");
    b.apply_document(doc);
  }
  for (const auto& o : flag_overrides) b.apply_override(o);
  for (const auto& o : a.overrides) b.apply_override(o);
  if (auto problems = b.problems(); !problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw InvalidInput(msg);
  }
  for (const auto& o : b.overrides()) std::cerr << "override: " << o << '\n';
  return b;
}

std::vector<std::string> flag_overrides(const CommonArgs& a, const char* seed_key, const char* episodes_key) {
  std::vector<std::string> out;
  if (a.seed) out.push_back(std::string(seed_key) + "=" + std::to_string(*a.seed));
  if (a.episodes) out.push_back(std::string(episodes_key) + "=" + std::to_string(*a.episodes));
  if (a.workers) out.push_back("run.workers=" + std::to_string(*a.workers));
  if (a.method) out.push_back("env.avoidance_cost=\"" + *a.method + "\"");
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void check_dimensions(const Checkpoint& ckpt, const FormationEnv& env, const std::string& path) {
  const int want = env.observation_size();
  if (ckpt.actor.input_size() != want) {
    throw InvalidInput("checkpoint '" + path + "' expects observations of shape (" +
                       std::to_string(ckpt.actor.input_size()) + "), config produces shape (" +
                       std::to_string(want) + ")");
  }
}

int cmd_train(const CommonArgs& a) {
  const ConfigBuilder builder = build_config(a, nullptr, flag_overrides(a, "run.seed", "train.episodes"));
  const RunConfig& cfg = builder.config();
  ensure_dir(a.out);
  write_file_atomic(path_in(a.out, "config_echo.json"), builder.echo().dump(2) + "\n");

  Trainer trainer(cfg.env, cfg.ddpg, cfg.seed, cfg.train_episodes);
  std::vector<EpisodeRecord> curve;
  auto flush_curve = [&] {
    std::ostringstream os;
    write_curve_csv(os, curve);
    write_file_atomic(path_in(a.out, "curve.csv"), os.str());
  };
  for (int ep = 0; ep < cfg.train_episodes; ++ep) {
    curve.push_back(trainer.run_episode());
    const EpisodeRecord& r = curve.back();
    if ((ep + 1) % 50 == 0 || ep + 1 == cfg.train_episodes) {
      std::cerr << "episode " << ep + 1 << "/" << cfg.train_episodes << " cost " << r.total_cost
                << " error " << r.mean_tracking_error << '\n';
    }
    if (cfg.checkpoint_every > 0 && (ep + 1) % cfg.checkpoint_every == 0 && ep + 1 < cfg.train_episodes) {
      save_checkpoint(path_in(a.out, "checkpoint_ep" + std::to_string(ep + 1) + ".json"),
                      make_checkpoint(trainer.agent(), ep + 1, builder.echo()));
      flush_curve();
    }
  }
  flush_curve();
  save_checkpoint(path_in(a.out, "checkpoint.json"),
                  make_checkpoint(trainer.agent(), trainer.episodes_done(), builder.echo()));
  return 0;
}

struct PolicyArgs {
  std::string policy = "learned";
  std::vector<std::string> checkpoints;
  std::vector<std::string> labels;
  bool trajectories = false;
};

void add_policy(CLI::App* cmd, PolicyArgs& p, bool many) {
  cmd->add_option("--policy", p.policy, "Follower policy")
      ->check(CLI::IsMember({"learned", "still", "tracker", "tracker_stream", "random"}));
  if (many) {
    cmd->add_option("--checkpoint", p.checkpoints, "Trained checkpoint (repeat for several rows)");
    cmd->add_option("--label", p.labels, "Row label per checkpoint (default: its avoidance cost)");
    cmd->add_flag("--trajectories", p.trajectories, "Also write one trajectory log per episode");
  } else {
    cmd->add_option("--checkpoint", p.checkpoints, "Trained checkpoint")->expected(0, 1);
  }
}

std::unique_ptr<FollowerPolicy> scripted_policy(const std::string& name, std::uint64_t seed) {
  if (name == "still") return std::make_unique<StandStillPolicy>();
  if (name == "tracker") return std::make_unique<FormationTrackerPolicy>();
  if (name == "tracker_stream") {
    TrackerGains g;
    g.stream = 1.0;
    return std::make_unique<FormationTrackerPolicy>(g);
  }
  if (name == "random") return std::make_unique<RandomPolicy>(seed);
  throw InvalidInput("unknown policy '" + name + "'");
}

// One evaluation subject: its configuration, policy and row label.
struct Subject {
  ConfigBuilder config;
  std::unique_ptr<FollowerPolicy> policy;
  std::string label;
};

std::vector<Subject> load_subjects(const CommonArgs& a, const PolicyArgs& p,
                                   const std::vector<std::string>& flags) {
  std::vector<Subject> out;
  if (p.policy != "learned") {
    if (!p.checkpoints.empty()) throw InvalidInput("--checkpoint is only used with --policy learned");
    ConfigBuilder b = build_config(a, nullptr, flags);
    auto policy = scripted_policy(p.policy, b.config().seed);
    out.push_back({std::move(b), std::move(policy), p.policy});
    return out;
  }
  if (p.checkpoints.empty()) throw InvalidInput("--policy learned needs at least one --checkpoint");
  if (!p.labels.empty() && p.labels.size() != p.checkpoints.size()) {
    throw InvalidInput("--label must be given once per --checkpoint");
  }
  for (std::size_t i = 0; i < p.checkpoints.size(); ++i) {
    Checkpoint ckpt;
    try {
      ckpt = load_checkpoint(p.checkpoints[i]);
    } catch (const std::exception& e) {
      throw InvalidInput(e.what());
    }
    const nlohmann::json base = ckpt.config;
    ConfigBuilder b = build_config(a, &base, flags);
    check_dimensions(ckpt, FormationEnv(b.config().eval_env()), p.checkpoints[i]);
    std::string label = p.labels.empty() ? std::string(to_string(b.config().env.avoidance_cost)) : p.labels[i];
    out.push_back({std::move(b), std::make_unique<ActorPolicy>(ckpt.actor, label), label});
  }
  return out;
}

int cmd_eval(const CommonArgs& a, const PolicyArgs& p) {
  const auto subjects = load_subjects(a, p, flag_overrides(a, "eval.seed_base", "eval.episodes"));
  std::vector<Metrics> rows;
  for (const Subject& s : subjects) {
    const RunConfig& cfg = s.config.config();
    const auto seeds = seed_range(cfg.eval_seed_base, cfg.eval_episodes);
    rows.push_back(evaluate(cfg.eval_env(), *s.policy, seeds, s.label, cfg.workers));
    std::cerr << s.label << ": tracking error " << rows.back().tracking_error_m << " m, collision rate "
              << rows.back().collision_rate_pct << " %\n";
  }

  ensure_dir(a.out);
  if (p.trajectories) {
    for (std::size_t i = 0; i < subjects.size(); ++i) {
      const RunConfig& cfg = subjects[i].config.config();
      FormationEnv env(cfg.eval_env());
      auto policy = subjects[i].policy->clone();
      for (std::uint64_t seed : seed_range(cfg.eval_seed_base, cfg.eval_episodes)) {
        TrajectoryLog log;
        run_episode(env, *policy, seed, &log);
        std::ostringstream os;
        log.write_jsonl(os);
        write_file_atomic(path_in(a.out, "trajectory_" + subjects[i].label + "_" + std::to_string(seed) + ".jsonl"),
                          os.str());
      }
    }
  }
  std::ostringstream os;
  write_metrics_table(os, rows);
  write_file_atomic(path_in(a.out, "metrics.csv"), os.str());
  return 0;
}

int cmd_rollout(const CommonArgs& a, const PolicyArgs& p) {
  auto subjects = load_subjects(a, p, flag_overrides(a, "eval.seed_base", "eval.episode_steps"));
  Subject& s = subjects.front();
  const RunConfig& cfg = s.config.config();
  FormationEnv env(cfg.eval_env());
  TrajectoryLog log;
  const EpisodeStats stats = run_episode(env, *s.policy, cfg.eval_seed_base, &log);

  ensure_dir(a.out);
  std::ostringstream os;
  log.write_jsonl(os);
  write_file_atomic(path_in(a.out, "trajectory.jsonl"), os.str());
  nlohmann::ordered_json summary = {{"seed", stats.seed},
                                    {"steps", stats.steps},
                                    {"mean_tracking_error", stats.mean_tracking_error},
                                    {"total_cost", stats.total_cost},
                                    {"collision_steps", stats.collision_steps},
                                    {"collided", stats.collided}};
  write_file_atomic(path_in(a.out, "rollout_stats.json"), summary.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Formation control with stream-function obstacle avoidance"};
  app.require_subcommand(1);

  CommonArgs train_args, eval_args, rollout_args;
  PolicyArgs eval_policy, rollout_policy;

  auto* train = app.add_subcommand("train", "Train a shared follower policy");
  add_common(train, train_args);
  auto* eval = app.add_subcommand("eval", "Evaluate policies and write metrics.csv");
  add_common(eval, eval_args);
  add_policy(eval, eval_policy, true);
  auto* rollout = app.add_subcommand("rollout", "Run one episode and write its trajectory log");
  add_common(rollout, rollout_args);
  add_policy(rollout, rollout_policy, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train_args);
    if (eval->parsed()) return cmd_eval(eval_args, eval_policy);
    if (rollout->parsed()) return cmd_rollout(rollout_args, rollout_policy);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
