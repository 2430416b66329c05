#pragma once

#include <string_view>

#include "aeromap/room.hpp"

namespace aeromap {

enum class RobotState { idle, sweeping, homing, halted };

std::string_view to_string(RobotState s);
RobotState robot_state_from_string(std::string_view name);

// Stepper command: whole 1 mm steps and whole 1 degree turns. Rotation is
// applied first, then translation along the new heading. Negative steps
// drive backwards.
struct MotionCommand {
  int translate_steps = 0;
  int rotate_turns = 0;
};

struct MotionResult {
  Pose pose;
  int achieved_steps = 0;  // signed, same sign as the request
  bool blocked = false;    // stopped short by the wall standoff
};

inline constexpr double kDefaultStandoffMm = 50.0;

// Smallest L-infinity distance from p to any wall. Keeping this at or above
// the standoff also keeps the Euclidean wall distance above it.
double wall_clearance(const RectilinearPolygon& room, Point p);

// Pure kinematics: rotate, then advance until the requested step count or
// the standoff boundary, whichever comes first. Each axis of the resulting
// position is rounded to the nearest millimetre.
MotionResult step(const World& world, const Pose& pose, MotionCommand cmd,
                  double standoff_mm = kDefaultStandoffMm);

// Stateful robot: refuses motion while halted.
class Robot {
 public:
  Robot(Pose pose, double standoff_mm = kDefaultStandoffMm)
      : pose_(pose), standoff_mm_(standoff_mm) {}

  const Pose& pose() const { return pose_; }
  RobotState state() const { return state_; }
  double standoff_mm() const { return standoff_mm_; }
  void set_state(RobotState s) { state_ = s; }

  // Throws HaltedError when halted.
  MotionResult step(const World& world, MotionCommand cmd);

  // Turn in place to an absolute heading by the shorter direction.
  MotionResult face(const World& world, double heading_deg);

 private:
  Pose pose_;
  double standoff_mm_;
  RobotState state_ = RobotState::idle;
};

}  // namespace aeromap
