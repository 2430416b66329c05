#include "aeromap/mission.hpp"

#include <cmath>
#include <stdexcept>

#include "aeromap/error.hpp"

namespace aeromap {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::start:
      return "start";
    case EventKind::halt:
      return "halt";
    case EventKind::resume:
      return "resume";
    case EventKind::home_begin:
      return "home_begin";
    case EventKind::home_end:
      return "home_end";
  }
  return "?";
}

EventKind event_kind_from_string(std::string_view name) {
  if (name == "start") return EventKind::start;
  if (name == "halt") return EventKind::halt;
  if (name == "resume") return EventKind::resume;
  if (name == "home_begin") return EventKind::home_begin;
  if (name == "home_end") return EventKind::home_end;
  throw ConfigError("unknown event kind: " + std::string(name));
}

void validate_plan(const RectilinearPolygon& room, const SweepPlan& plan) {
  if (!(plan.lane_spacing_mm > 0.0)) throw ConfigError("lane_spacing_mm must be > 0");
  if (!(plan.sample_spacing_mm > 0.0)) throw ConfigError("sample_spacing_mm must be > 0");
  if (plan.scan_every < 1) throw ConfigError("scan_every must be >= 1");
  if (!(plan.scan_increment_deg > 0.0) || plan.scan_increment_deg > 360.0) {
    throw ConfigError("scan_increment_deg must be in (0, 360]");
  }
  if (plan.scan_max_range_mm < 0.0) throw ConfigError("scan_max_range_mm must be >= 0");
  if (!(plan.standoff_mm >= 0.0)) throw ConfigError("standoff_mm must be >= 0");
  if (!(plan.speed_mm_per_s > 0.0)) throw ConfigError("speed_mm_per_s must be > 0");
  if (plan.sample_dwell_ms < 1) throw ConfigError("sample_dwell_ms must be >= 1");
  if (plan.dock_readings < 1) throw ConfigError("dock_readings must be >= 1");
  const auto [lo, hi] = room.bounds();
  if (plan.lane_spacing_mm > hi.y - lo.y) {
    throw ConfigError("lane spacing " + std::to_string(plan.lane_spacing_mm) +
                      " mm is wider than the room (" + std::to_string(hi.y - lo.y) + " mm)");
  }
  if (plan.sample_spacing_mm > hi.x - lo.x) {
    throw ConfigError("sample spacing is wider than the room");
  }
  if (hi.y - lo.y <= 2.0 * plan.standoff_mm || hi.x - lo.x <= 2.0 * plan.standoff_mm) {
    throw ConfigError("room is too small for the wall standoff");
  }
  const Point dock = dock_position(room, plan);
  if (!room.contains(dock) || wall_clearance(room, dock) < plan.standoff_mm - 1e-9) {
    throw ConfigError("dock position lies outside the robot's free space");
  }
}

Point dock_position(const RectilinearPolygon& room, const SweepPlan& plan) {
  if (plan.dock) return *plan.dock;
  const auto [lo, hi] = room.bounds();
  return {std::round(lo.x + plan.standoff_mm), std::round(lo.y + plan.standoff_mm)};
}

namespace {

// lo, lo+step, ... strictly below hi, then hi itself.
std::vector<double> covering_positions(double lo, double hi, double step) {
  std::vector<double> out;
  for (double v = lo; v < hi - 1e-9; v += step) out.push_back(std::round(v));
  out.push_back(std::round(hi));
  return out;
}

}  // namespace

std::vector<Point> lawnmower_waypoints(const RectilinearPolygon& room, const SweepPlan& plan) {
  validate_plan(room, plan);
  const auto [lo, hi] = room.bounds();
  const auto lanes =
      covering_positions(lo.y + plan.standoff_mm, hi.y - plan.standoff_mm, plan.lane_spacing_mm);
  const auto columns = covering_positions(lo.x + plan.standoff_mm, hi.x - plan.standoff_mm,
                                          plan.sample_spacing_mm);
  std::vector<Point> out;
  for (std::size_t lane = 0; lane < lanes.size(); ++lane) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const std::size_t col = lane % 2 == 0 ? k : columns.size() - 1 - k;
      const Point p{columns[col], lanes[lane]};
      if (room.contains(p) && wall_clearance(room, p) >= plan.standoff_mm - 1e-9) {
        out.push_back(p);
      }
    }
  }
  return out;
}

MissionRunner::MissionRunner(World world, SweepPlan plan, Rng rng)
    : world_(std::move(world)),
      plan_(std::move(plan)),
      rng_(std::move(rng)),
      dock_(dock_position(world_.room, plan_)),
      robot_(Pose{dock_.x, dock_.y, 0.0}, plan_.standoff_mm) {
  world_.validate();
  validate_plan(world_.room, plan_);
}

void MissionRunner::add_event(EventKind kind, std::string detail) {
  log_.events.push_back({clock_ms_, kind, std::move(detail)});
}

void MissionRunner::place(const Pose& pose) {
  if (state() != RobotState::idle) throw std::logic_error("place requires an idle robot");
  // The robot moves in whole millimetres and turns in whole degrees, so a
  // pose off that lattice could never line up with an axis again.
  const Pose snapped{std::round(pose.x), std::round(pose.y), normalize_heading(std::round(pose.heading))};
  if (!world_.room.contains(snapped.position())) throw DomainError("pose outside the room");
  robot_ = Robot(snapped, plan_.standoff_mm);
}

void MissionRunner::start() {
  if (state() != RobotState::idle) {
    throw std::logic_error("start requires an idle robot, state is " +
                           std::string(to_string(state())));
  }
  log_ = {};
  clock_ms_ = 0;
  finished_ = false;
  last_homing_.reset();
  pending_.clear();
  robot_.set_state(RobotState::sweeping);
  add_event(EventKind::start, "");
  queue_sweep();
}

void MissionRunner::halt(const std::string& detail) {
  const RobotState s = state();
  if (s != RobotState::sweeping && s != RobotState::homing) return;
  resume_to_ = s;
  robot_.set_state(RobotState::halted);
  add_event(EventKind::halt, detail);
  if (s == RobotState::homing) {
    pending_.clear();
    last_homing_ = HomingResult{pose(), distance(pose().position(), dock_), true};
    add_event(EventKind::home_end, "aborted");
  }
}

void MissionRunner::resume() {
  if (state() != RobotState::halted) return;
  robot_.set_state(resume_to_);
  add_event(EventKind::resume, "");
  if (resume_to_ == RobotState::homing) {
    add_event(EventKind::home_begin, "resumed");
    queue_homing();
  }
}

void MissionRunner::begin_homing(const std::string& detail) {
  pending_.clear();
  robot_.set_state(RobotState::homing);
  add_event(EventKind::home_begin, detail);
  queue_homing();
}

void MissionRunner::queue_sweep() {
  const auto waypoints = lawnmower_waypoints(world_.room, plan_);
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    pending_.push_back({ActionKind::travel, waypoints[i]});
    pending_.push_back({ActionKind::sample, {}});
    if (i % static_cast<std::size_t>(plan_.scan_every) == 0) {
      pending_.push_back({ActionKind::scan, {}});
    }
  }
}

void MissionRunner::queue_homing() {
  pending_.clear();
  pending_.push_back({ActionKind::travel, dock_});
  pending_.push_back({ActionKind::align, dock_});
  pending_.push_back({ActionKind::face_home, {}});
  pending_.push_back({ActionKind::end_homing, {}});
}

bool MissionRunner::advance() {
  const RobotState s = state();
  if (s != RobotState::sweeping && s != RobotState::homing) return false;
  if (pending_.empty()) {
    if (s == RobotState::sweeping) {
      begin_homing("sweep_complete");
      return true;
    }
    return false;
  }
  const Action action = pending_.front();
  pending_.pop_front();
  switch (action.kind) {
    case ActionKind::travel:
      do_travel(action.target);
      break;
    case ActionKind::sample:
      do_sample();
      break;
    case ActionKind::scan:
      do_scan();
      break;
    case ActionKind::align:
      do_align();
      break;
    case ActionKind::face_home: {
      const MotionResult r = robot_.face(world_, 0.0);
      (void)r;
      break;
    }
    case ActionKind::end_homing: {
      last_homing_ = HomingResult{pose(), distance(pose().position(), dock_), false};
      robot_.set_state(RobotState::idle);
      finished_ = true;
      add_event(EventKind::home_end, "ok");
      break;
    }
  }
  return true;
}

void MissionRunner::run() {
  while (advance()) {
  }
}

void MissionRunner::do_step(MotionCommand cmd) {
  const MotionResult r = robot_.step(world_, cmd);
  clock_ms_ += static_cast<std::int64_t>(
      std::ceil(std::abs(cmd.rotate_turns) * plan_.turn_ms_per_deg +
                std::abs(r.achieved_steps) * 1000.0 / plan_.speed_mm_per_s));
}

void MissionRunner::do_travel(Point target) {
  auto leg = [&](bool along_x) {
    const double delta = along_x ? target.x - pose().x : target.y - pose().y;
    const long steps = std::lround(std::abs(delta));
    if (steps == 0) return;
    const double heading = along_x ? (delta > 0 ? 0.0 : 180.0) : (delta > 0 ? 90.0 : 270.0);
    const double before = pose().heading;
    const MotionResult turn = robot_.face(world_, heading);
    clock_ms_ += static_cast<std::int64_t>(
        std::ceil(std::abs(turn.pose.heading - before) * plan_.turn_ms_per_deg));
    do_step({static_cast<int>(steps), 0});
  };
  auto arrived = [&] { return pose().x == target.x && pose().y == target.y; };
  leg(true);
  leg(false);
  if (arrived()) return;
  // Blocked on the x-first route (non-convex room): try y first.
  leg(false);
  leg(true);
}

void MissionRunner::do_sample() {
  clock_ms_ += plan_.sample_dwell_ms;
  SensorFrame f = sense_gas(world_, pose(), world_.noise.enabled, rng_, clock_ms_);
  log_.frames.push_back({f, pose()});
}

void MissionRunner::do_scan() {
  const std::size_t id = log_.scan_poses.size();
  const Pose at = pose();
  log_.scan_poses.push_back(at);
  const int readings = static_cast<int>(std::lround(360.0 / plan_.scan_increment_deg));
  for (int k = 0; k < readings; ++k) {
    const double bearing = normalize_heading(at.heading + k * plan_.scan_increment_deg);
    clock_ms_ += plan_.scan_reading_ms;
    // The sensor gets no return from walls beyond its range; that depends on
    // the true distance, not on the noisy estimate.
    const auto hit = world_.room.ray_cast(at.position(), bearing);
    if (!hit) continue;
    if (plan_.scan_max_range_mm > 0.0 && hit->range > plan_.scan_max_range_mm) continue;
    const double r = world_.noise.enabled ? apply_noise(hit->range, world_.noise.distance, rng_,
                                                        physical_range(Channel::distance))
                                          : hit->range;
    if (!(r > 0.0)) continue;
    log_.points.push_back({quantize_milli(at.x + r * cos_deg(bearing)),
                           quantize_milli(at.y + r * sin_deg(bearing)), id});
  }
}

void MissionRunner::do_align() {
  // Compare measured ranges to the walls behind (-x) and beside (-y) the
  // dock with what they read from the dock itself, then step off the
  // difference.
  for (const double bearing : {180.0, 270.0}) {
    const auto expected = world_.room.ray_cast(dock_, bearing);
    if (!expected) throw InternalError("dock has no wall behind it");
    double measured = 0.0;
    for (int i = 0; i < plan_.dock_readings; ++i) {
      measured += sense_distance(world_, pose(), bearing, world_.noise.enabled, rng_);
      clock_ms_ += plan_.scan_reading_ms;
    }
    measured /= plan_.dock_readings;
    const long correction = std::lround(measured - expected->range);
    if (correction == 0) continue;
    const double before = pose().heading;
    const MotionResult turn = robot_.face(world_, bearing);
    clock_ms_ += static_cast<std::int64_t>(
        std::ceil(std::abs(turn.pose.heading - before) * plan_.turn_ms_per_deg));
    do_step({static_cast<int>(correction), 0});
  }
}

MissionLog run_sweep(const World& world, const SweepPlan& plan, Rng& rng) {
  MissionRunner runner(world, plan, rng);
  runner.start();
  runner.run();
  rng = runner.rng();
  return runner.log();
}

HomingResult home(const World& world, const Pose& pose, bool noise_on, Rng& rng,
                  const SweepPlan& plan) {
  World w = world;
  w.noise.enabled = noise_on;
  MissionRunner runner(std::move(w), plan, rng);
  runner.place(pose);
  runner.begin_homing("operator");
  runner.run();
  rng = runner.rng();
  return *runner.last_homing();
}

}  // namespace aeromap
