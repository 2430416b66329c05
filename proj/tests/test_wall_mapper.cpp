#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "aeromap/error.hpp"
#include "aeromap/mission.hpp"
#include "aeromap/wall_mapper.hpp"

using namespace aeromap;

namespace {

Cluster cluster_of(Orientation o, std::vector<Point> pts) {
  Cluster c{o, {}};
  for (const Point& p : pts) c.points.push_back({p.x, p.y, 0});
  return c;
}

// Exact boundary points every `step` mm along each edge.
PointCloud boundary_cloud(const RectilinearPolygon& room, double step) {
  PointCloud cloud;
  for (std::size_t i = 0; i < room.size(); ++i) {
    const Segment e = room.edge(i);
    const double len = distance(e.a, e.b);
    const int n = static_cast<int>(len / step);
    for (int k = 1; k < n; ++k) {
      const double t = k * step / len;
      cloud.push_back({e.a.x + t * (e.b.x - e.a.x), e.a.y + t * (e.b.y - e.a.y), 0});
    }
  }
  return cloud;
}

MissionLog scan_mission(const RectilinearPolygon& room, bool noise, std::uint64_t seed,
                        double max_range) {
  World w;
  w.room = room;
  w.noise.enabled = noise;
  SweepPlan plan;
  plan.scan_max_range_mm = max_range;
  Rng rng(seed);
  return run_sweep(w, plan, rng);
}

const RectilinearPolygon kRect = RectilinearPolygon::rectangle(4000, 3000);
const RectilinearPolygon kL({{0, 0}, {6000, 0}, {6000, 2000}, {2500, 2000}, {2500, 4000}, {0, 4000}});

// Normal equations for y = a + b x, solved by Cramer's rule.
std::pair<double, double> normal_equations(const std::vector<std::pair<double, double>>& xy) {
  long double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : xy) {
    n += 1;
    sx += x;
    sy += y;
    sxx += static_cast<long double>(x) * x;
    sxy += static_cast<long double>(x) * y;
  }
  const long double det = n * sxx - sx * sx;
  const long double a = (sy * sxx - sx * sxy) / det;
  const long double b = (n * sxy - sx * sy) / det;
  return {static_cast<double>(a), static_cast<double>(b)};
}

double sse(const std::vector<std::pair<double, double>>& xy, double a, double b) {
  double s = 0;
  for (auto [x, y] : xy) s += (y - a - b * x) * (y - a - b * x);
  return s;
}

}  // namespace

TEST_SUITE("wall_mapper") {

TEST_CASE("fit_line on exact data") {
  auto l = fit_line(cluster_of(Orientation::horizontal, {{0, 2}, {1, 5}, {2, 8}}));
  CHECK(l.a == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(l.b == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(l.support == 3);
  CHECK(l.extent_min == 0.0);
  CHECK(l.extent_max == 2.0);

  l = fit_line(cluster_of(Orientation::horizontal, {{0, 0}, {1, 1}, {2, 1}}));
  CHECK(l.b == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(l.a == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  std::vector<Point> col;
  for (int y = 0; y <= 3000; y += 100) col.push_back({1000, double(y)});
  l = fit_line(cluster_of(Orientation::vertical, col));
  CHECK(l.a == 1000.0);
  CHECK(l.b == 0.0);
  CHECK(l.extent_min == 0.0);
  CHECK(l.extent_max == 3000.0);
}

TEST_CASE("fit_line rejects a degenerate cluster") {
  CHECK_THROWS_AS(fit_line(cluster_of(Orientation::horizontal, {{5, 0}, {5, 1}, {5, 2}})), DegenerateError);
}

TEST_CASE("fit_line matches the normal equations and beats a grid") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ux(0, 4000), ua(-500, 3500), ub(-0.3, 0.3);
  std::normal_distribution<double> noise(0, 40);
  for (int rep = 0; rep < 100; ++rep) {
    const auto o = rep % 2 ? Orientation::vertical : Orientation::horizontal;
    const double a0 = ua(rng), b0 = ub(rng);
    std::vector<std::pair<double, double>> xy;  // (independent, dependent)
    std::vector<Point> pts;
    for (int i = 0; i < 10; ++i) {
      const double x = ux(rng), y = a0 + b0 * x + noise(rng);
      xy.push_back({x, y});
      pts.push_back(o == Orientation::horizontal ? Point{x, y} : Point{y, x});
    }
    const LineModel l = fit_line(cluster_of(o, pts));
    const auto [a, b] = normal_equations(xy);
    CHECK(std::abs(l.a - a) <= 1e-9 * std::max(1.0, std::abs(a)));
    CHECK(std::abs(l.b - b) <= 1e-9 * std::max(1.0, std::abs(b)));
    const double best = sse(xy, l.a, l.b);
    const double da = std::max(1.0, std::abs(l.a)) * 1e-3, db = 1e-4;
    for (int i = -100; i <= 100; ++i) {
      for (int j = -100; j <= 100; ++j) {
        REQUIRE(best <= sse(xy, l.a + i * da, l.b + j * db) * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("intersect") {
  const LineModel h0{Orientation::horizontal, 0, 0}, v0{Orientation::vertical, 0, 0};
  CHECK(intersect(h0, v0) == Point{0, 0});
  CHECK(intersect(v0, h0) == Point{0, 0});
  const LineModel h{Orientation::horizontal, 1, 0.5}, v{Orientation::vertical, 2, 0};
  const Point p = intersect(h, v);
  CHECK(p.x == doctest::Approx(2.0));
  CHECK(p.y == doctest::Approx(2.0));
  CHECK_THROWS_AS(intersect(h0, h), DegenerateError);
  // x = y and y = x: the same line
  CHECK_THROWS_AS(intersect(LineModel{Orientation::horizontal, 0, 1}, LineModel{Orientation::vertical, 0, 1}),
                  DegenerateError);
}

TEST_CASE("grouping a perfect rectangle") {
  const Grouping g = group_points(boundary_cloud(kRect, 20));
  REQUIRE(g.clusters.size() == 4);
  int vertical = 0;
  for (const Cluster& c : g.clusters) vertical += c.orientation == Orientation::vertical;
  CHECK(vertical == 2);
  CHECK(g.rejected.empty());
}

TEST_CASE("stray points only") {
  const PointCloud strays{{100, 100, 0}, {2000, 1700, 0}, {3500, 400, 0}};
  CHECK_THROWS_AS(group_points(strays), InsufficientDataError);
  CHECK(group_points({}).clusters.empty());
  CHECK_THROWS_AS(extract_walls(strays), InsufficientDataError);
}

TEST_CASE("every point ends up in one cluster or rejected") {
  const MissionLog log = scan_mission(kRect, true, 5, 1200);
  const Grouping g = group_points(log.points);
  std::size_t n = g.rejected.size();
  for (const Cluster& c : g.clusters) {
    CHECK(c.points.size() >= 5);
    n += c.points.size();
  }
  CHECK(n == log.points.size());
}

TEST_CASE("centre scan cluster sizes") {
  // Bearing b from (2000, 1500) hits the right wall when |b| < atan(1500 /
  // 2000), the top wall when it is within atan(2000 / 1500) of 90, and so on.
  const double right_half = std::atan2(1500.0, 2000.0) * 180.0 / std::numbers::pi;
  std::map<std::string, std::size_t> expected;
  for (int b = 0; b < 360; ++b) {
    const double d = b > 180 ? b - 360.0 : b;
    if (std::abs(d) < right_half) ++expected["right"];
    else if (std::abs(d) > 180 - right_half) ++expected["left"];
    else if (d > 0) ++expected["top"];
    else ++expected["bottom"];
  }
  CHECK(expected["right"] == 73);
  CHECK(expected["top"] == 107);

  PointCloud cloud;
  for (int b = 0; b < 360; ++b) {
    const auto hit = kRect.ray_cast({2000, 1500}, b);
    cloud.push_back({hit->point.x, hit->point.y, 0});
  }
  const Grouping g = group_points(cloud);
  REQUIRE(g.clusters.size() == 4);
  std::map<std::string, std::size_t> got;
  for (const Cluster& c : g.clusters) {
    const Point p = c.points.front().point();
    const std::string wall = c.orientation == Orientation::vertical ? (p.x > 2000 ? "right" : "left")
                                                                    : (p.y > 1500 ? "top" : "bottom");
    got[wall] = c.points.size();
  }
  CHECK(got == expected);
}

TEST_CASE("noiseless rectangle is exact") {
  for (double range : {0.0, 1200.0}) {
    CAPTURE(range);
    const MissionLog log = scan_mission(kRect, false, 1, range);
    const WallModel m = extract_walls(log.points);
    const auto truth = kRect.ccw_ring();
    REQUIRE(m.corners.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(distance(m.corners[i], truth[i]) <= 1e-3);
    }
    const std::vector<double> lengths{4000, 3000, 4000, 3000};
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(m.wall_lengths[i] - lengths[i]) <= 1e-3);
    CHECK(m.lines.size() == m.corners.size());
  }
}

TEST_CASE("noiseless L-shaped room is exact") {
  const MissionLog log = scan_mission(kL, false, 1, 0.0);
  const WallModel m = extract_walls(log.points);
  const auto truth = kL.ccw_ring();
  REQUIRE(m.corners.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(distance(m.corners[i], truth[i]) <= 1e-3);
  const ErrorReport r = evaluate_map(m, kL);
  CHECK(r.mean_wall_mape < 1e-6);
}

TEST_CASE("noisy L-shaped room maps") {
  const MissionLog log = scan_mission(kL, true, 3, 1200.0);
  const WallModel m = extract_walls(log.points);
  CHECK(m.corners.size() == 6);
  CHECK(evaluate_map(m, kL).mean_wall_mape < 10.0);
}

TEST_CASE("transposing the cloud swaps orientations") {
  const MissionLog log = scan_mission(kRect, true, 11, 1200);
  PointCloud t = log.points;
  for (MapPoint& p : t) std::swap(p.x, p.y);
  const WallModel a = extract_walls(log.points);
  const WallModel b = extract_walls(t);
  REQUIRE(a.lines.size() == b.lines.size());
  for (const LineModel& la : a.lines) {
    const bool found = std::any_of(b.lines.begin(), b.lines.end(), [&](const LineModel& lb) {
      return lb.orientation != la.orientation && lb.support == la.support &&
             std::abs(lb.a - la.a) <= 1e-9 * std::max(1.0, std::abs(la.a)) &&
             std::abs(lb.b - la.b) <= 1e-9;
    });
    CHECK(found);
  }
  for (const Point& c : a.corners) {
    const bool found = std::any_of(b.corners.begin(), b.corners.end(), [&](const Point& d) {
      return std::abs(d.x - c.y) < 1e-6 && std::abs(d.y - c.x) < 1e-6;
    });
    CHECK(found);
  }
}

TEST_CASE("translating the cloud translates the corners") {
  const MissionLog log = scan_mission(kRect, true, 12, 1200);
  const double dx = 1234.5, dy = -321.25;
  PointCloud moved = log.points;
  for (MapPoint& p : moved) {
    p.x += dx;
    p.y += dy;
  }
  const WallModel a = extract_walls(log.points);
  const WallModel b = extract_walls(moved);
  REQUIRE(a.corners.size() == b.corners.size());
  for (std::size_t i = 0; i < a.corners.size(); ++i) {
    const bool found = std::any_of(b.corners.begin(), b.corners.end(), [&](const Point& d) {
      return std::abs(d.x - (a.corners[i].x + dx)) < 1e-6 && std::abs(d.y - (a.corners[i].y + dy)) < 1e-6;
    });
    CHECK(found);
  }
}

TEST_CASE("evaluate_map") {
  const WallModel exact = extract_walls(boundary_cloud(kRect, 10));
  const ErrorReport zero = evaluate_map(exact, kRect);
  CHECK(zero.mean_wall_mape < 1e-9);
  for (double d : zero.corner_displacement_mm) CHECK(d < 1e-6);

  // short the right-hand wall: 2838 of 3000
  std::vector<LineModel> ring = exact.lines;
  const ErrorReport r = evaluate_map(wall_model_from_ring(ring), kRect,
                                     std::vector<Point>{{1000, 1000}},
                                     std::vector<Point>{{1041.7, 958.0}});
  REQUIRE(r.gas_x_mape);
  CHECK(*r.gas_x_mape == doctest::Approx(4.17).epsilon(1e-9));
  CHECK(*r.gas_y_mape == doctest::Approx(4.20).epsilon(1e-9));

  // wall-length MAPE is |est - true| / true
  ring[2].a = 2838;  // top wall at y = 2838: both side walls become 2838 long
  const ErrorReport s = evaluate_map(wall_model_from_ring(ring), kRect);
  CHECK(s.wall_length_mape[1] == doctest::Approx(100.0 * 162 / 3000));
  CHECK(s.wall_length_mape[1] == doctest::Approx(5.4));
}

TEST_CASE("evaluate_map on a model that is not the truth") {
  const WallModel l = extract_walls(boundary_cloud(kL, 10));
  CHECK_THROWS_AS(evaluate_map(l, kRect), TopologyMismatchError);
  try {
    evaluate_map(l, kRect);
  } catch (const TopologyMismatchError& e) {
    CHECK(e.estimated() == 6);
    CHECK(e.truth() == 4);
  }
  const ErrorReport self = evaluate_map(l, kL);
  CHECK(self.mean_wall_mape < 1e-9);
}

TEST_CASE("gas peaks") {
  World w;
  w.room = RectilinearPolygon::rectangle(4000, 3000);
  w.noise.enabled = false;
  Rng rng(1);
  SweepPlan plan;
  CHECK(locate_gas_peaks(run_sweep(w, plan, rng), Species::co2).empty());

  w.gas_sources.push_back({{1030, 1980}, Species::co2, 600, 500, {}});
  auto peaks = locate_gas_peaks(run_sweep(w, plan, rng), Species::co2);
  REQUIRE(peaks.size() == 1);
  // nearest sample point on the 500 mm grid from (50, 50)
  CHECK(peaks[0] == Point{1050, 2050});

  w.gas_sources = {{{1000, 1000}, Species::voc, 400, 300, {}}, {{3000, 2200}, Species::voc, 500, 300, {}}};
  plan.lane_spacing_mm = 250;
  plan.sample_spacing_mm = 250;
  peaks = locate_gas_peaks(run_sweep(w, plan, rng), Species::voc);
  REQUIRE(peaks.size() == 2);
  // strongest first
  CHECK(distance(peaks[0], {3000, 2200}) <= 125 * std::sqrt(2.0));
  CHECK(distance(peaks[1], {1000, 1000}) <= 125 * std::sqrt(2.0));
}

TEST_CASE("outlier pre-filter keeps a noiseless map exact") {
  WallParams p;
  p.outlier_filter = true;
  const WallModel m = extract_walls(boundary_cloud(kRect, 10), p);
  REQUIRE(m.corners.size() == 4);
  CHECK(distance(m.corners[2], {4000, 3000}) < 1e-6);
}

TEST_CASE("orientation names") {
  CHECK(orientation_from_string("vertical") == Orientation::vertical);
  CHECK(to_string(Orientation::horizontal) == "horizontal");
}

}
