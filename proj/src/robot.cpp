#include "aeromap/robot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aeromap/error.hpp"

namespace aeromap {

std::string_view to_string(RobotState s) {
  switch (s) {
    case RobotState::idle:
      return "idle";
    case RobotState::sweeping:
      return "sweeping";
    case RobotState::homing:
      return "homing";
    case RobotState::halted:
      return "halted";
  }
  return "?";
}

RobotState robot_state_from_string(std::string_view name) {
  if (name == "idle") return RobotState::idle;
  if (name == "sweeping") return RobotState::sweeping;
  if (name == "homing") return RobotState::homing;
  if (name == "halted") return RobotState::halted;
  throw ConfigError("unknown robot state: " + std::string(name));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kClearanceEps = 1e-9;

double linf_to_edge(const Segment& e, Point p) {
  const double x0 = std::min(e.a.x, e.b.x);
  const double x1 = std::max(e.a.x, e.b.x);
  const double y0 = std::min(e.a.y, e.b.y);
  const double y1 = std::max(e.a.y, e.b.y);
  const double dx = std::max({x0 - p.x, 0.0, p.x - x1});
  const double dy = std::max({y0 - p.y, 0.0, p.y - y1});
  return std::max(dx, dy);
}

// Open interval of t where origin + t*dir is strictly inside (lo, hi) along
// one axis.
bool slab(double origin, double dir, double lo, double hi, double& t_in, double& t_out) {
  if (dir == 0.0) {
    if (origin > lo && origin < hi) return true;  // always inside this slab
    return false;
  }
  double t0 = (lo - origin) / dir;
  double t1 = (hi - origin) / dir;
  if (t0 > t1) std::swap(t0, t1);
  t_in = std::max(t_in, t0);
  t_out = std::min(t_out, t1);
  return true;
}

// Longest travel along dir that never enters the standoff box of any edge.
double free_travel(const RectilinearPolygon& room, Point p, Point dir, double standoff) {
  double limit = kInf;
  for (std::size_t i = 0; i < room.size(); ++i) {
    const Segment e = room.edge(i);
    if (linf_to_edge(e, p) < standoff - kClearanceEps) {
      // Already inside this edge's box: only allow moves that open the gap.
      const double nx = e.horizontal() ? 0.0 : (p.x - e.a.x);
      const double ny = e.horizontal() ? (p.y - e.a.y) : 0.0;
      if (nx * dir.x + ny * dir.y <= 0.0) limit = 0.0;
      continue;
    }
    const double x0 = std::min(e.a.x, e.b.x) - standoff;
    const double x1 = std::max(e.a.x, e.b.x) + standoff;
    const double y0 = std::min(e.a.y, e.b.y) - standoff;
    const double y1 = std::max(e.a.y, e.b.y) + standoff;
    double t_in = -kInf;
    double t_out = kInf;
    if (!slab(p.x, dir.x, x0, x1, t_in, t_out)) continue;
    if (!slab(p.y, dir.y, y0, y1, t_in, t_out)) continue;
    if (t_in < t_out && t_out > 0.0) limit = std::min(limit, std::max(t_in, 0.0));
  }
  return limit;
}

}  // namespace

double wall_clearance(const RectilinearPolygon& room, Point p) {
  double best = kInf;
  for (std::size_t i = 0; i < room.size(); ++i) best = std::min(best, linf_to_edge(room.edge(i), p));
  return best;
}

MotionResult step(const World& world, const Pose& pose, MotionCommand cmd, double standoff_mm) {
  MotionResult out;
  out.pose = pose;
  out.pose.heading = normalize_heading(pose.heading + static_cast<double>(cmd.rotate_turns));
  if (cmd.translate_steps == 0) return out;

  const double sign = cmd.translate_steps > 0 ? 1.0 : -1.0;
  const Point dir{sign * cos_deg(out.pose.heading), sign * sin_deg(out.pose.heading)};
  const long requested = std::labs(static_cast<long>(cmd.translate_steps));
  const double room_for = free_travel(world.room, pose.position(), dir, standoff_mm);

  long achieved = requested;
  if (room_for < static_cast<double>(requested)) {
    achieved = static_cast<long>(std::floor(room_for + 1e-9));
  }
  auto place = [&](long n) {
    return Point{std::round(pose.x + static_cast<double>(n) * dir.x),
                 std::round(pose.y + static_cast<double>(n) * dir.y)};
  };
  const double start_clearance = wall_clearance(world.room, pose.position());
  Point p = place(achieved);
  // Per-axis rounding can nudge a diagonal move into the standoff band.
  while (achieved > 0 &&
         wall_clearance(world.room, p) < std::min(standoff_mm, start_clearance) - kClearanceEps) {
    --achieved;
    p = place(achieved);
  }
  out.pose.x = p.x;
  out.pose.y = p.y;
  out.achieved_steps = static_cast<int>(sign * static_cast<double>(achieved));
  out.blocked = achieved < requested;
  return out;
}

MotionResult Robot::step(const World& world, MotionCommand cmd) {
  if (state_ == RobotState::halted) throw HaltedError();
  MotionResult r = aeromap::step(world, pose_, cmd, standoff_mm_);
  pose_ = r.pose;
  return r;
}

MotionResult Robot::face(const World& world, double heading_deg) {
  const double target = normalize_heading(std::round(heading_deg));
  double delta = target - pose_.heading;
  if (delta > 180.0) delta -= 360.0;
  if (delta <= -180.0) delta += 360.0;
  return step(world, {0, static_cast<int>(std::lround(delta))});
}

}  // namespace aeromap
