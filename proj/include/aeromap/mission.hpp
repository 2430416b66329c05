#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aeromap/robot.hpp"
#include "aeromap/room.hpp"

namespace aeromap {

// Coverage and scanning parameters for one mission.
struct SweepPlan {
  double lane_spacing_mm = 500.0;
  double sample_spacing_mm = 500.0;
  int scan_every = 4;                // scan at every k-th sample point
  double scan_increment_deg = 1.0;
  double scan_max_range_mm = 1200.0; // walls further than this give no return; 0 = no limit
  double standoff_mm = kDefaultStandoffMm;
  double speed_mm_per_s = 200.0;
  double turn_ms_per_deg = 5.0;
  std::int64_t sample_dwell_ms = 500;
  std::int64_t scan_reading_ms = 10;
  int dock_readings = 1;             // range readings averaged per wall when docking
  std::optional<Point> dock;         // default: room min corner + standoff

  friend bool operator==(const SweepPlan&, const SweepPlan&) = default;
};

// Wall hit from a range scan, tagged with the scan pose that produced it.
struct MapPoint {
  double x = 0.0;
  double y = 0.0;
  std::size_t pose_id = 0;

  Point point() const { return {x, y}; }
  friend bool operator==(const MapPoint&, const MapPoint&) = default;
};

using PointCloud = std::vector<MapPoint>;

struct TaggedFrame {
  SensorFrame frame;
  Pose pose;

  friend bool operator==(const TaggedFrame&, const TaggedFrame&) = default;
};

enum class EventKind { start, halt, resume, home_begin, home_end };

std::string_view to_string(EventKind k);
EventKind event_kind_from_string(std::string_view name);

struct MissionEvent {
  std::int64_t t_ms = 0;
  EventKind kind = EventKind::start;
  std::string detail;

  friend bool operator==(const MissionEvent&, const MissionEvent&) = default;
};

struct MissionLog {
  std::vector<TaggedFrame> frames;  // strictly increasing timestamps
  std::vector<Pose> scan_poses;     // indexed by MapPoint::pose_id
  PointCloud points;
  std::vector<MissionEvent> events;

  friend bool operator==(const MissionLog&, const MissionLog&) = default;
};

// Throws ConfigError for non-positive spacings or lanes wider than the room.
void validate_plan(const RectilinearPolygon& room, const SweepPlan& plan);

Point dock_position(const RectilinearPolygon& room, const SweepPlan& plan);

// Boustrophedon waypoints: lanes run along x and are spaced along y; both
// the first and last lane sit on the standoff boundary. Waypoints outside
// the free region are dropped.
std::vector<Point> lawnmower_waypoints(const RectilinearPolygon& room, const SweepPlan& plan);

struct HomingResult {
  Pose final_pose;
  double displacement_error_mm = 0.0;
  bool aborted = false;
};

// Incremental mission executor. Each advance() performs one action (travel
// to a waypoint, take a sample, scan, or one homing stage), so a supervisor
// can halt the robot between actions.
class MissionRunner {
 public:
  MissionRunner(World world, SweepPlan plan, Rng rng);

  // Teleports an idle robot, e.g. to home from an arbitrary pose. The pose is
  // rounded to 1 mm and 1 degree.
  void place(const Pose& pose);
  // idle -> sweeping. Starts a fresh log.
  void start();
  // sweeping/homing -> halted. Homing in progress is recorded as aborted.
  void halt(const std::string& detail);
  // halted -> whatever was running before.
  void resume();
  // Abandon any remaining sweep and drive back to the dock.
  void begin_homing(const std::string& detail);

  // Executes one pending action. Returns false when there is nothing to do
  // (idle, halted, or finished).
  bool advance();
  // Runs to completion unless halted.
  void run();

  RobotState state() const { return robot_.state(); }
  const Pose& pose() const { return robot_.pose(); }
  const MissionLog& log() const { return log_; }
  const World& world() const { return world_; }
  const SweepPlan& plan() const { return plan_; }
  std::int64_t clock_ms() const { return clock_ms_; }
  Point dock() const { return dock_; }
  bool finished() const { return finished_; }
  std::optional<HomingResult> last_homing() const { return last_homing_; }
  Rng& rng() { return rng_; }

 private:
  enum class ActionKind { travel, sample, scan, align, face_home, end_homing };
  struct Action {
    ActionKind kind;
    Point target;
  };

  void queue_sweep();
  void queue_homing();
  void add_event(EventKind kind, std::string detail);
  void do_travel(Point target);
  void do_sample();
  void do_scan();
  void do_align();
  void do_step(MotionCommand cmd);

  World world_;
  SweepPlan plan_;
  Rng rng_;
  Point dock_;
  Robot robot_;
  MissionLog log_;
  std::deque<Action> pending_;
  std::int64_t clock_ms_ = 0;
  RobotState resume_to_ = RobotState::idle;
  bool finished_ = false;
  std::optional<HomingResult> last_homing_;
};

// Full mission from the dock: sweep, scan, then home. `rng` is advanced.
MissionLog run_sweep(const World& world, const SweepPlan& plan, Rng& rng);

// Drives from `pose` back to the dock with dead reckoning, then docks using
// range readings to the walls behind and beside the dock.
HomingResult home(const World& world, const Pose& pose, bool noise_on, Rng& rng,
                  const SweepPlan& plan = {});

}  // namespace aeromap
