#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sfc/checkpoint.hpp"
#include "sfc/config.hpp"
#include "sfc/episode.hpp"
#include "sfc/trainer.hpp"

namespace py = pybind11;
using namespace sfc;

namespace {

using Limits = std::tuple<double, double, double, double>;
using State = std::tuple<double, double, double, double, double>;

MotionLimits to_limits(const Limits& l) {
  return {std::get<0>(l), std::get<1>(l), std::get<2>(l), std::get<3>(l)};
}

ConfigBuilder make_config(const std::string& json_text, const std::vector<std::string>& overrides) {
  ConfigBuilder b;
  b.apply_document(nlohmann::json::parse(json_text));
  for (const std::string& o : overrides) b.apply_override(o);
  if (const auto problems = b.problems(); !problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw py::value_error(msg);
  }
  return b;
}

py::dict step_dict(const StepResult& r) {
  std::vector<double> rewards, tracking, avoiding;
  std::vector<bool> collisions;
  for (const FollowerStep& f : r.followers) {
    rewards.push_back(f.reward);
    tracking.push_back(f.r_tracking);
    avoiding.push_back(f.r_avoiding);
    collisions.push_back(f.collision);
  }
  py::dict d;
  d["observations"] = r.observations;
  d["rewards"] = rewards;
  d["tracking_costs"] = tracking;
  d["avoidance_costs"] = avoiding;
  d["collisions"] = collisions;
  d["done"] = r.done;
  return d;
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["method"] = m.method;
  d["tracking_error_m"] = m.tracking_error_m;
  d["collision_rate_pct"] = m.collision_rate_pct;
  d["step_collision_rate_pct"] = m.step_collision_rate_pct;
  return d;
}

std::unique_ptr<FollowerPolicy> make_policy(const std::string& name, const RunConfig& cfg,
                                            const std::optional<std::string>& checkpoint) {
  if (name == "learned") {
    if (!checkpoint) throw py::value_error("policy 'learned' needs a checkpoint");
    return std::make_unique<ActorPolicy>(load_checkpoint(*checkpoint).actor);
  }
  if (name == "still") return std::make_unique<StandStillPolicy>();
  if (name == "tracker") return std::make_unique<FormationTrackerPolicy>();
  if (name == "tracker_stream") {
    TrackerGains g;
    g.stream = 1.0;
    return std::make_unique<FormationTrackerPolicy>(g);
  }
  if (name == "random") return std::make_unique<RandomPolicy>(cfg.seed);
  throw py::value_error("unknown policy '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Formation control with stream-function obstacle avoidance.";

  m.def("wrap_angle", &wrap_angle, py::arg("angle"));
  m.def(
      "circumcenter",
      [](std::pair<double, double> a, std::pair<double, double> b,
         std::pair<double, double> c) -> std::optional<std::tuple<double, double, double>> {
        const auto circle = circumcenter({a.first, a.second}, {b.first, b.second}, {c.first, c.second});
        if (!circle) return std::nullopt;
        return std::make_tuple(circle->center.x, circle->center.y, circle->radius);
      },
      py::arg("p1"), py::arg("p2"), py::arg("p3"),
      "Circle through three points as (cx, cy, r); None when they are collinear.");
  m.def(
      "stream_value",
      [](double x, double y, double radius, double flow_strength) {
        return stream_value({x, y}, radius, flow_strength);
      },
      py::arg("x"), py::arg("y"), py::arg("radius"), py::arg("flow_strength") = 1.0);
  m.def(
      "step_agent",
      [](const State& s, std::pair<double, double> control, double dt, const Limits& limits) {
        AgentState a;
        a.position = {std::get<0>(s), std::get<1>(s)};
        a.speed = std::get<2>(s);
        a.heading = Angle(std::get<3>(s));
        a.turn_rate = std::get<4>(s);
        Rng unused(0);
        StepOptions opts;
        opts.dt = dt;
        const AgentState n = step(a, {control.first, control.second}, to_limits(limits), StateNoise(), unused, opts);
        return State{n.position.x, n.position.y, n.speed, n.heading.value(), n.turn_rate};
      },
      py::arg("state"), py::arg("control"), py::arg("dt") = 0.1,
      py::arg("limits") = Limits{0.5, 0.2, 0.5, 0.5},
      "Noiseless step of (x, y, v, heading, turn_rate) under (accel, angular_accel).");
  m.def(
      "map_action",
      [](const RawAction& u, const Limits& limits) {
        const ControlInput c = map_action(u, to_limits(limits));
        return std::make_pair(c.accel, c.angular_accel);
      },
      py::arg("u"), py::arg("limits") = Limits{0.5, 0.2, 0.5, 0.5});

  py::class_<ConfigBuilder>(m, "Config")
      .def(py::init(&make_config), py::arg("json_text") = "{}",
           py::arg("overrides") = std::vector<std::string>{})
      .def("echo", [](const ConfigBuilder& b) { return b.echo().dump(); })
      .def_property_readonly("seed", [](const ConfigBuilder& b) { return b.config().seed; })
      .def_static("keys", &ConfigBuilder::keys);

  py::class_<FormationEnv>(m, "Env")
      .def(py::init([](const ConfigBuilder& b) { return FormationEnv(b.config().env); }), py::arg("config"))
      .def("reset", &FormationEnv::reset, py::arg("seed"))
      .def(
          "step",
          [](FormationEnv& env, const std::vector<std::pair<double, double>>& actions) {
            std::vector<ControlInput> controls;
            for (const auto& [a, b] : actions) controls.push_back({a, b});
            return step_dict(env.step(controls));
          },
          py::arg("actions"), "One (accel, angular_accel) per follower.")
      .def_property_readonly("observation_size", &FormationEnv::observation_size)
      .def_property_readonly("n_followers", &FormationEnv::n_followers)
      .def("agent_states",
           [](const FormationEnv& env) {
             std::vector<State> out;
             for (const AgentState& a : env.world().agents)
               out.emplace_back(a.position.x, a.position.y, a.speed, a.heading.value(), a.turn_rate);
             return out;
           })
      .def("obstacles", [](const FormationEnv& env) {
        std::vector<std::tuple<double, double, double>> out;
        for (const Circle& c : env.world().obstacles) out.emplace_back(c.center.x, c.center.y, c.radius);
        return out;
      });

  py::class_<Mlp>(m, "Actor")
      .def_static("load", [](const std::string& path) { return load_checkpoint(path).actor; }, py::arg("path"))
      .def_property_readonly("obs_dim", &Mlp::input_size)
      .def("act", &actor_forward, py::arg("observation"), "Noiseless simplex action.");

  py::class_<Trainer>(m, "Trainer")
      .def(py::init([](const ConfigBuilder& b) {
             const RunConfig& c = b.config();
             return std::make_unique<Trainer>(c.env, c.ddpg, c.seed, c.train_episodes);
           }),
           py::arg("config"))
      .def("run_episode",
           [](Trainer& t) {
             const EpisodeRecord r = t.run_episode();
             py::dict d;
             d["episode"] = r.episode;
             d["total_cost"] = r.total_cost;
             d["mean_tracking_error"] = r.mean_tracking_error;
             d["collided"] = r.collided;
             d["sigma"] = r.sigma;
             d["critic_loss"] = r.critic_loss;
             return d;
           })
      .def_property_readonly("episodes_done", &Trainer::episodes_done)
      .def("actor", [](const Trainer& t) { return t.agent().actor(); })
      .def(
          "save",
          [](const Trainer& t, const std::string& path, const ConfigBuilder& b) {
            save_checkpoint(path, make_checkpoint(t.agent(), t.episodes_done(), b.echo()));
          },
          py::arg("path"), py::arg("config"));

  m.def(
      "evaluate",
      [](const ConfigBuilder& b, const std::string& policy, const std::optional<std::string>& checkpoint) {
        const RunConfig& cfg = b.config();
        const auto p = make_policy(policy, cfg, checkpoint);
        Metrics result;
        {
          py::gil_scoped_release release;
          result = evaluate(cfg.eval_env(), *p, seed_range(cfg.eval_seed_base, cfg.eval_episodes), policy,
                            cfg.workers);
        }
        return metrics_dict(result);
      },
      py::arg("config"), py::arg("policy"), py::arg("checkpoint") = std::nullopt,
      "Runs eval.episodes held-out episodes and returns the summary metrics.");
}
