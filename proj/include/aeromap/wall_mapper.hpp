#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "aeromap/geometry.hpp"
#include "aeromap/mission.hpp"

namespace aeromap {

enum class Orientation { vertical, horizontal };

std::string_view to_string(Orientation o);
Orientation orientation_from_string(std::string_view name);

struct Cluster {
  Orientation orientation = Orientation::horizontal;
  std::vector<MapPoint> points;
};

struct Grouping {
  std::vector<Cluster> clusters;
  std::vector<MapPoint> rejected;
};

struct GroupParams {
  // Neighbourhood of the orientation test. Under range noise the spread of a
  // small neighbourhood is dominated by scatter along the rays, so this is
  // large; it is capped at max(7, n / 16) for a cloud of n points.
  int k_neighbors = 61;
  double gap_mm = 300.0;
  std::size_t min_cluster_size = 5;
  // A point is a stray when fewer than this share of its orientation's
  // points lie within gap_mm / 2 of it along the dependent axis. 0 disables.
  double band_min_fraction = 0.05;
};

struct WallParams {
  GroupParams group;
  // Reassign every point to its best-fitting line and refit this many times.
  int refine_passes = 2;
  // Optional pre-filter: drop points further than outlier_sigma residual
  // standard deviations from a provisional fit of their cluster.
  bool outlier_filter = false;
  double outlier_sigma = 3.0;
};

// Horizontal lines: y = a + b*x. Vertical lines: x = a + b*y.
struct LineModel {
  Orientation orientation = Orientation::horizontal;
  double a = 0.0;
  double b = 0.0;
  std::size_t support = 0;
  double extent_min = 0.0;  // range of the independent coordinate
  double extent_max = 0.0;

  // Dependent coordinate at the given independent coordinate.
  double at(double independent) const { return a + b * independent; }
  // Perpendicular distance from p to the infinite line.
  double distance_to(Point p) const;

  friend bool operator==(const LineModel&, const LineModel&) = default;
};

struct WallModel {
  std::vector<LineModel> lines;     // lines[i] carries the wall corners[i] -> corners[i+1]
  std::vector<Point> corners;       // counterclockwise, starting nearest the origin
  std::vector<double> wall_lengths;

  friend bool operator==(const WallModel&, const WallModel&) = default;
};

struct ErrorReport {
  std::vector<double> wall_length_mape;   // percent, aligned with the truth ring
  double mean_wall_mape = 0.0;            // percent
  std::vector<double> corner_displacement_mm;
  std::vector<double> estimated_lengths;
  std::vector<double> true_lengths;
  std::optional<double> gas_x_mape;       // percent
  std::optional<double> gas_y_mape;       // percent
};

// Labels each point by the coordinate spread of its k nearest neighbours,
// then splits each orientation into contiguous clusters at gaps wider than
// gap_mm. Throws InsufficientDataError when a non-empty cloud yields no
// cluster at all.
Grouping group_points(const PointCloud& cloud, const GroupParams& params = {});

// Ordinary least squares on the cluster's own parameterization.
// Throws DegenerateError when the independent coordinate has no spread.
LineModel fit_line(const Cluster& cluster);

// Corner of a horizontal and a vertical line. Throws DegenerateError for a
// same-orientation pair or a near-singular system.
Point intersect(const LineModel& l1, const LineModel& l2);

// Full pipeline: group, fit, link perpendicular neighbours into a ring,
// intersect. Throws InsufficientDataError when no closed ring of at least
// two walls per orientation can be formed.
WallModel extract_walls(const PointCloud& cloud, const WallParams& params = {});

// Builds the ordered corner ring and wall lengths from ring-ordered lines.
WallModel wall_model_from_ring(std::vector<LineModel> ring);

// Compares an estimated ring to the ground-truth room. Gas arguments are
// optional and evaluated only when both are present.
ErrorReport evaluate_map(const WallModel& estimated, const RectilinearPolygon& truth,
                         const std::optional<std::vector<Point>>& gas_truth = std::nullopt,
                         const std::optional<std::vector<Point>>& gas_estimated = std::nullopt);

struct PeakParams {
  // Samples within this radius are grid neighbours; 0 = 1.5x the median
  // nearest-neighbour spacing of the sample poses.
  double neighbor_radius_mm = 0.0;
  // A peak must exceed the lowest reading of the channel by at least this.
  double min_rise = 0.0;
};

// Sample positions that are local maxima of the species channel over the
// sweep grid, strongest first.
std::vector<Point> locate_gas_peaks(const MissionLog& log, Species species,
                                    const PeakParams& params = {});

}  // namespace aeromap
