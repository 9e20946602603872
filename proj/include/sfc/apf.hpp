#pragma once

#include <span>
#include <string_view>

#include "sfc/stream_avoid.hpp"

namespace sfc {

/// Repulsive artificial-potential-field cost used as the comparison baseline.
struct ApfParams {
  double cutoff = 0.7;  // d0, influence range
  double gain = 1.0;    // eta

  void validate() const;
};

/// 0.5 * eta * (1/d - 1/d0)^2 for d < d0, else 0. Throws for d <= 0.
double apf_term(double distance, const ApfParams& params);

/// Sum of apf_term over the given per-side shortest-ray distances.
double apf_cost(std::span<const double> distances, const ApfParams& params);

/// apf_cost over the sides of an avoidance update that detected something.
double apf_cost(const AvoidanceUpdate& update, const ApfParams& params);

enum class AvoidanceMethod { stream, apf_risk, apf_stop };

std::string_view to_string(AvoidanceMethod m);
/// Parses "stream", "apf_risk" or "apf_stop"; throws std::invalid_argument.
AvoidanceMethod parse_avoidance_method(std::string_view name);

}  // namespace sfc
