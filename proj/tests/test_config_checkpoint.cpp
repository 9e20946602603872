#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "sfc/checkpoint.hpp"
#include "sfc/config.hpp"

using namespace sfc;
using nlohmann::json;

TEST_CASE("defaults are valid and fully echoed") {
  ConfigBuilder b;
  CHECK(b.problems().empty());
  const auto echo = b.echo();
  const auto keys = ConfigBuilder::keys();
  CHECK(echo.size() == keys.size());
  CHECK(std::set<std::string>(keys.begin(), keys.end()).size() == keys.size());
  for (const auto& k : keys) {
    REQUIRE(echo.contains(k));
    const std::string origin = echo[k]["origin"];
    CHECK((origin == "paper" || origin == "default"));
  }
  CHECK(echo["env.n_followers"]["origin"] == "paper");
  CHECK(echo["ddpg.gamma"]["origin"] == "default");
  CHECK(echo["env.lidar.resolution_deg"]["value"].get<double>() == doctest::Approx(3.0));
}

TEST_CASE("echo reconstructs the run") {
  ConfigBuilder a;
  a.apply_override("env.n_followers=2");
  a.apply_override("ddpg.hidden=[16,32]");
  a.apply_override("env.avoidance_cost=apf_stop");
  a.apply_override("env.tracking_weight=[[2,0.5],[0.5,1]]");
  a.apply_override("env.navigator.waypoints=[[1,2],[3,4]]");
  a.apply_override("env.navigator.mode=waypoints");
  REQUIRE(a.problems().empty());
  CHECK(a.overrides().size() == 6);
  CHECK(a.echo()["env.n_followers"]["origin"] == "override");

  ConfigBuilder b;
  b.apply_document(json::parse(a.echo().dump()));
  REQUIRE(b.problems().empty());
  for (const auto& k : ConfigBuilder::keys()) CHECK(b.echo()[k]["value"] == a.echo()[k]["value"]);
  CHECK(b.config().env.avoidance_cost == AvoidanceMethod::apf_stop);
  CHECK(b.config().ddpg.hidden == std::vector<int>{16, 32});
  CHECK(b.config().env.tracking_weight(0, 1) == 0.5);
}

TEST_CASE("nested and flat documents agree") {
  ConfigBuilder flat, nested;
  flat.apply_document(json::parse(R"({"env.dt": 0.05, "env.stream.d_stop": 0.3, "ddpg.batch_size": 64})"));
  nested.apply_document(json::parse(R"({"env": {"dt": 0.05, "stream": {"d_stop": 0.3}}, "ddpg": {"batch_size": 64}})"));
  CHECK(flat.problems().empty());
  CHECK(flat.echo() == nested.echo());
  CHECK(nested.config().env.stream.d_stop == 0.3);
  CHECK(nested.echo()["env.dt"]["origin"] == "config");
}

TEST_CASE("validation lists every problem") {
  ConfigBuilder b;
  b.apply_override("env.tracking_weight=[[1,0],[0,-1]]");
  b.apply_override("env.stream.d_stop=0.7");
  b.apply_override("ddpg.gamma=1.0");
  b.apply_override("env.no_such_key=3");
  b.apply_override("env.dt=\"fast\"");
  b.apply_override("missing_equals");
  const auto problems = b.problems();
  CHECK(problems.size() == 6);
  auto mentions = [&](const std::string& needle) {
    return std::any_of(problems.begin(), problems.end(),
                       [&](const std::string& p) { return p.find(needle) != std::string::npos; });
  };
  CHECK(mentions("tracking_weight"));
  CHECK(mentions("d_stop"));
  CHECK(mentions("gamma"));
  CHECK(mentions("env.no_such_key"));
  CHECK(mentions("env.dt"));
  CHECK(mentions("missing_equals"));

  ConfigBuilder g;
  g.apply_override("ddpg.gamma=0");
  CHECK(g.problems().size() == 1);
}

TEST_CASE("load_run_config") {
  const auto dir = std::filesystem::temp_directory_path() / "sfc_config_test";
  std::filesystem::create_directories(dir);
  const auto good = (dir / "good.json").string();
  std::ofstream(good) << R"({"train": {"episodes": 12}, "run.seed": 5})";
  const ConfigBuilder b = load_run_config(good, {"eval.episodes=3"});
  CHECK(b.config().train_episodes == 12);
  CHECK(b.config().seed == 5);
  CHECK(b.config().eval_episodes == 3);

  const auto bad = (dir / "bad.json").string();
  std::ofstream(bad) << R"({"env.stream.d_stop": 0.9, "ddpg.tau": 0})";
  try {
    load_run_config(bad, {});
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("d_stop") != std::string::npos);
    CHECK(msg.find("tau") != std::string::npos);
  }
  CHECK_THROWS_AS(load_run_config((dir / "absent.json").string(), {}), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint round trip is bit exact") {
  DdpgConfig cfg;
  cfg.hidden = {7, 5};
  cfg.batch_size = 4;
  cfg.buffer_capacity = 16;
  const DdpgAgent agent(11, cfg, 99);
  const Checkpoint ckpt = make_checkpoint(agent, 3, ConfigBuilder{}.echo());

  const Checkpoint back = checkpoint_from_json(nlohmann::ordered_json::parse(checkpoint_to_json(ckpt).dump()));
  CHECK(back.actor == ckpt.actor);
  CHECK(back.critic == ckpt.critic);
  CHECK(back.actor_target == ckpt.actor_target);
  CHECK(back.critic_target == ckpt.critic_target);
  CHECK(back.episodes_done == 3);
  CHECK(back.obs_dim == 11);
  CHECK(back.config == ckpt.config);

  const auto path = (std::filesystem::temp_directory_path() / "sfc_ckpt_test.json").string();
  save_checkpoint(path, ckpt);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.actor == ckpt.actor);
  CHECK(loaded.critic_target == ckpt.critic_target);
  save_checkpoint(path, loaded);
  std::ifstream a(path);
  const std::string first((std::istreambuf_iterator<char>(a)), {});
  CHECK(first == checkpoint_to_json(ckpt).dump());
  std::filesystem::remove(path);

  const json doc = checkpoint_to_json(ckpt);
  const auto& w = doc["arrays"]["actor/0/weight"];
  CHECK(w["shape"][0] == 7);
  CHECK(w["shape"][1] == 11);
  CHECK(w["data"][1].get<double>() == ckpt.actor.layers()[0].weight(0, 1));
}

TEST_CASE("malformed checkpoints are refused") {
  DdpgConfig cfg;
  cfg.hidden = {4};
  cfg.batch_size = 2;
  cfg.buffer_capacity = 4;
  const nlohmann::ordered_json good = nlohmann::ordered_json::parse(checkpoint_to_json(make_checkpoint(DdpgAgent(3, cfg, 1), 0, {})).dump());

  nlohmann::ordered_json broken = good;
  broken["arrays"]["actor/1/weight"]["shape"] = {3, 5};
  CHECK_THROWS_AS(checkpoint_from_json(broken), std::runtime_error);
  broken = good;
  broken["arrays"].erase("critic/0/bias");
  CHECK_THROWS(checkpoint_from_json(broken));
  broken = good;
  broken["format"] = 42;
  CHECK_THROWS_AS(checkpoint_from_json(broken), std::runtime_error);
  broken = good;
  broken["obs_dim"] = 4;
  CHECK_THROWS_AS(checkpoint_from_json(broken), std::runtime_error);
}
