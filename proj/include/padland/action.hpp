// Normalized four-axis control command shared by the simulator, the runtime
// control loop, and the trainer.
#pragma once

#include <cmath>

namespace padland {

// All components live in [-1, 1]. Positive pitch moves forward, positive roll
// moves right, positive yaw turns counterclockwise, positive throttle climbs.
struct ControlAction {
  double pitch = 0.0;
  double roll = 0.0;
  double yaw = 0.0;
  double throttle = 0.0;

  bool finite() const {
    return std::isfinite(pitch) && std::isfinite(roll) && std::isfinite(yaw) &&
           std::isfinite(throttle);
  }
};

}  // namespace padland
