#include "sfc/action.hpp"

namespace sfc {

ControlInput map_action(const RawAction& u, const MotionLimits& limits) {
  return clamp_controls({u[0] * limits.max_accel, (u[1] - u[2]) * limits.max_angular_accel}, limits);
}

}  // namespace sfc
