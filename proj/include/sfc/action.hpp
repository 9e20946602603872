#pragma once

#include <array>

#include "sfc/dynamics.hpp"

namespace sfc {

/// Actor output on the 3-simplex: [u0, u1, u2].
using RawAction = std::array<double, 3>;

/// u0 scales the acceleration and u1 - u2 the angular acceleration; the
/// result is clamped to the limits.
ControlInput map_action(const RawAction& u, const MotionLimits& limits);

}  // namespace sfc
