#include "aeromap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "aeromap/error.hpp"

namespace aeromap {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

namespace {

// Returns the exact value at multiples of 90 degrees, otherwise nullopt.
std::optional<int> quadrant_of(double degrees) {
  const double q = degrees / 90.0;
  if (q != std::floor(q)) return std::nullopt;
  const auto k = static_cast<long long>(std::floor(q));
  return static_cast<int>(((k % 4) + 4) % 4);
}

bool ranges_overlap(double a0, double a1, double b0, double b1) {
  return std::max(std::min(a0, a1), std::min(b0, b1)) <=
         std::min(std::max(a0, a1), std::max(b0, b1));
}

bool segments_touch(const Segment& s, const Segment& t) {
  // Both axis-aligned: they touch iff their bounding boxes overlap.
  return ranges_overlap(s.a.x, s.b.x, t.a.x, t.b.x) &&
         ranges_overlap(s.a.y, s.b.y, t.a.y, t.b.y);
}

}  // namespace

double cos_deg(double degrees) {
  if (auto q = quadrant_of(degrees)) {
    static constexpr double kCos[4] = {1.0, 0.0, -1.0, 0.0};
    return kCos[*q];
  }
  return std::cos(degrees * std::numbers::pi / 180.0);
}

double sin_deg(double degrees) {
  if (auto q = quadrant_of(degrees)) {
    static constexpr double kSin[4] = {0.0, 1.0, 0.0, -1.0};
    return kSin[*q];
  }
  return std::sin(degrees * std::numbers::pi / 180.0);
}

double normalize_heading(double degrees) {
  double h = std::fmod(degrees, 360.0);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h;
}

double quantize_milli(double v) {
  const double q = std::round(v * 1000.0) / 1000.0;
  return q == 0.0 ? 0.0 : q;  // no negative zero on the wire
}

double distance_to_segment(Point p, const Segment& s) {
  const double dx = s.b.x - s.a.x;
  const double dy = s.b.y - s.a.y;
  const double len2 = dx * dx + dy * dy;
  double u = 0.0;
  if (len2 > 0.0) {
    u = std::clamp(((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2, 0.0, 1.0);
  }
  return distance(p, {s.a.x + u * dx, s.a.y + u * dy});
}

RectilinearPolygon::RectilinearPolygon(std::vector<Point> vertices)
    : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 4) throw ConfigError("room polygon needs at least 4 vertices");
  if (n % 2 != 0) throw ConfigError("rectilinear polygon must have an even vertex count");
  for (const auto& v : vertices_) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      throw ConfigError("room polygon has a non-finite vertex");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Segment e = edge(i);
    const bool horiz = e.a.y == e.b.y && e.a.x != e.b.x;
    const bool vert = e.a.x == e.b.x && e.a.y != e.b.y;
    if (!horiz && !vert) {
      throw ConfigError("room edge " + std::to_string(i) +
                        " is not axis-parallel or has zero length");
    }
    if (e.horizontal() == edge((i + 1) % n).horizontal()) {
      throw ConfigError("room edges " + std::to_string(i) + " and " +
                        std::to_string((i + 1) % n) + " are collinear");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the wrap
      if (segments_touch(edge(i), edge(j))) {
        throw ConfigError("room polygon self-intersects at edges " +
                          std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }
}

RectilinearPolygon RectilinearPolygon::rectangle(double width, double height,
                                                 Point origin) {
  return RectilinearPolygon({origin,
                             {origin.x + width, origin.y},
                             {origin.x + width, origin.y + height},
                             {origin.x, origin.y + height}});
}

Segment RectilinearPolygon::edge(std::size_t i) const {
  return {vertices_[i], vertices_[(i + 1) % vertices_.size()]};
}

double RectilinearPolygon::signed_area() const {
  double twice = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Point a = vertices_[i];
    const Point b = vertices_[(i + 1) % vertices_.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

bool RectilinearPolygon::contains(Point p, double eps) const {
  if (distance_to_boundary(p) <= eps) return true;
  // Crossing number against vertical edges for a ray towards +x.
  bool inside = false;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Segment e = edge(i);
    if (e.horizontal()) continue;
    const double y0 = std::min(e.a.y, e.b.y);
    const double y1 = std::max(e.a.y, e.b.y);
    if (p.y >= y0 && p.y < y1 && e.a.x > p.x) inside = !inside;
  }
  return inside;
}

double RectilinearPolygon::distance_to_boundary(Point p) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    best = std::min(best, distance_to_segment(p, edge(i)));
  }
  return best;
}

std::pair<Point, Point> RectilinearPolygon::bounds() const {
  Point lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Point hi{-lo.x, -lo.y};
  for (const auto& v : vertices_) {
    lo.x = std::min(lo.x, v.x);
    lo.y = std::min(lo.y, v.y);
    hi.x = std::max(hi.x, v.x);
    hi.y = std::max(hi.y, v.y);
  }
  return {lo, hi};
}

std::optional<RayHit> RectilinearPolygon::ray_cast(Point origin, double bearing_deg) const {
  const double c = cos_deg(bearing_deg);
  const double s = sin_deg(bearing_deg);
  constexpr double kMinRange = 1e-9;
  constexpr double kSlack = 1e-9;
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Segment e = edge(i);
    RayHit hit;
    hit.edge = i;
    if (e.horizontal()) {
      if (s == 0.0) continue;
      hit.range = (e.a.y - origin.y) / s;
      if (hit.range <= kMinRange) continue;
      const double x = origin.x + hit.range * c;
      const double x0 = std::min(e.a.x, e.b.x);
      const double x1 = std::max(e.a.x, e.b.x);
      if (x < x0 - kSlack || x > x1 + kSlack) continue;
      hit.point = {std::clamp(x, x0, x1), e.a.y};
    } else {
      if (c == 0.0) continue;
      hit.range = (e.a.x - origin.x) / c;
      if (hit.range <= kMinRange) continue;
      const double y = origin.y + hit.range * s;
      const double y0 = std::min(e.a.y, e.b.y);
      const double y1 = std::max(e.a.y, e.b.y);
      if (y < y0 - kSlack || y > y1 + kSlack) continue;
      hit.point = {e.a.x, std::clamp(y, y0, y1)};
    }
    if (!best || hit.range < best->range) best = hit;
  }
  return best;
}

std::vector<Point> RectilinearPolygon::ccw_ring() const { return canonical_ring(vertices_); }

std::vector<Point> canonical_ring(std::vector<Point> ring) {
  if (ring.size() < 3) return ring;
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point a = ring[i];
    const Point b = ring[(i + 1) % ring.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  if (twice < 0.0) std::reverse(ring.begin(), ring.end());
  const auto start = std::min_element(ring.begin(), ring.end(), [](Point a, Point b) {
    const double da = std::hypot(a.x, a.y);
    const double db = std::hypot(b.x, b.y);
    if (da != db) return da < db;
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  });
  std::rotate(ring.begin(), start, ring.end());
  return ring;
}

}  // namespace aeromap
