#include "sfc/apf.hpp"

#include <stdexcept>
#include <string>

namespace sfc {

void ApfParams::validate() const {
  if (!(cutoff > 0.0 && gain > 0.0)) throw std::invalid_argument("APF cutoff and gain must be positive");
}

double apf_term(double distance, const ApfParams& params) {
  if (!(distance > 0.0)) throw std::invalid_argument("apf_term: distance must be positive");
  if (distance >= params.cutoff) return 0.0;
  const double k = 1.0 / distance - 1.0 / params.cutoff;
  return 0.5 * params.gain * k * k;
}

double apf_cost(std::span<const double> distances, const ApfParams& params) {
  double cost = 0.0;
  for (double d : distances) cost += apf_term(d, params);
  return cost;
}

double apf_cost(const AvoidanceUpdate& update, const ApfParams& params) {
  double cost = 0.0;
  for (const SideReport& s : update.sides) {
    if (s.avoiding) cost += apf_term(s.shortest_distance, params);
  }
  return cost;
}

std::string_view to_string(AvoidanceMethod m) {
  switch (m) {
    case AvoidanceMethod::stream: return "stream";
    case AvoidanceMethod::apf_risk: return "apf_risk";
    case AvoidanceMethod::apf_stop: return "apf_stop";
  }
  return "unknown";
}

AvoidanceMethod parse_avoidance_method(std::string_view name) {
  if (name == "stream") return AvoidanceMethod::stream;
  if (name == "apf_risk") return AvoidanceMethod::apf_risk;
  if (name == "apf_stop") return AvoidanceMethod::apf_stop;
  throw std::invalid_argument("unknown avoidance method '" + std::string(name) +
                              "' (expected stream, apf_risk or apf_stop)");
}

}  // namespace sfc
