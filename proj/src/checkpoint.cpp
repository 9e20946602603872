#include "sfc/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sfc {

using ojson = nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

ojson matrix_entry(const Eigen::MatrixXd& m) {
  ojson data = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"shape", {m.rows(), m.cols()}}, {"data", std::move(data)}};
}

Eigen::MatrixXd read_matrix(const ojson& entry, const std::string& name) {
  if (!entry.contains("shape") || !entry.contains("data")) {
    throw std::runtime_error("checkpoint: array '" + name + "' lacks shape or data");
  }
  const auto rows = entry["shape"][0].get<Eigen::Index>();
  const auto cols = entry["shape"][1].get<Eigen::Index>();
  const auto& data = entry["data"];
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::runtime_error("checkpoint: array '" + name + "' has inconsistent shape");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[r * cols + c].get<double>();
  return m;
}

void put_net(ojson& arrays, const std::string& prefix, const Mlp& net) {
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const DenseLayer& layer = net.layers()[l];
    const std::string base = prefix + "/" + std::to_string(l);
    arrays[base + "/weight"] = matrix_entry(layer.weight);
    arrays[base + "/bias"] = matrix_entry(layer.bias);
  }
}

Mlp get_net(const ojson& arrays, const std::string& prefix) {
  Mlp net;
  for (std::size_t l = 0;; ++l) {
    const std::string base = prefix + "/" + std::to_string(l);
    if (!arrays.contains(base + "/weight")) break;
    DenseLayer layer;
    layer.weight = read_matrix(arrays[base + "/weight"], base + "/weight");
    const Eigen::MatrixXd bias = read_matrix(arrays.at(base + "/bias"), base + "/bias");
    if (bias.cols() != 1 || bias.rows() != layer.weight.rows()) {
      throw std::runtime_error("checkpoint: bias of '" + base + "' does not match its weight");
    }
    layer.bias = bias.col(0);
    if (!net.layers().empty() && net.layers().back().weight.rows() != layer.weight.cols()) {
      throw std::runtime_error("checkpoint: layer '" + base + "' does not chain onto the previous one");
    }
    net.layers().push_back(std::move(layer));
  }
  if (net.layers().empty()) throw std::runtime_error("checkpoint: network '" + prefix + "' is missing");
  return net;
}

}  // namespace

Checkpoint make_checkpoint(const DdpgAgent& agent, int episodes_done, ojson config) {
  return {agent.actor(),       agent.critic(),  agent.actor_target(), agent.critic_target(),
          agent.train_steps(), episodes_done,   agent.obs_dim(),      std::move(config)};
}

ojson checkpoint_to_json(const Checkpoint& ckpt) {
  ojson arrays = ojson::object();
  put_net(arrays, "actor", ckpt.actor);
  put_net(arrays, "critic", ckpt.critic);
  put_net(arrays, "actor_target", ckpt.actor_target);
  put_net(arrays, "critic_target", ckpt.critic_target);
  return {{"format", kFormatVersion},
          {"obs_dim", ckpt.obs_dim},
          {"train_steps", ckpt.train_steps},
          {"episodes_done", ckpt.episodes_done},
          {"config", ckpt.config},
          {"arrays", std::move(arrays)}};
}

Checkpoint checkpoint_from_json(const ojson& doc) {
  if (!doc.is_object() || doc.value("format", 0) != kFormatVersion) {
    throw std::runtime_error("checkpoint: unsupported or missing format version");
  }
  Checkpoint c;
  const auto& arrays = doc.at("arrays");
  c.actor = get_net(arrays, "actor");
  c.critic = get_net(arrays, "critic");
  c.actor_target = get_net(arrays, "actor_target");
  c.critic_target = get_net(arrays, "critic_target");
  c.train_steps = doc.at("train_steps").get<long>();
  c.episodes_done = doc.at("episodes_done").get<int>();
  c.obs_dim = doc.at("obs_dim").get<int>();
  c.config = doc.value("config", ojson::object());
  if (c.actor.input_size() != c.obs_dim || c.actor_target.input_size() != c.obs_dim) {
    throw std::runtime_error("checkpoint: actor input size disagrees with obs_dim");
  }
  return c;
}

void write_file_atomic(const std::string& path, const std::string& text) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw std::runtime_error("failed writing '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, target);
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  write_file_atomic(path, checkpoint_to_json(ckpt).dump());
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  const ojson doc = ojson::parse(in, nullptr, false);
  if (doc.is_discarded()) throw std::runtime_error("checkpoint '" + path + "' is not valid JSON");
  return checkpoint_from_json(doc);
}

}  // namespace sfc
