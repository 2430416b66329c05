#pragma once

#include <optional>
#include <span>
#include <vector>

namespace aeromap {

// Room-frame point, millimetres.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

// cos/sin of an angle in degrees, exact at multiples of 90.
double cos_deg(double degrees);
double sin_deg(double degrees);

// Maps any angle onto [0, 360).
double normalize_heading(double degrees);

// Rounds to the wire resolution of 0.001 (mm, or channel unit).
double quantize_milli(double v);

struct Segment {
  Point a;
  Point b;

  bool horizontal() const { return a.y == b.y; }
};

double distance_to_segment(Point p, const Segment& s);

struct RayHit {
  double range = 0.0;      // distance from origin to the hit, mm
  Point point;             // hit location, snapped onto the edge
  std::size_t edge = 0;    // index of the edge that was hit
};

// Closed, simple polygon whose edges alternate between horizontal and
// vertical. Vertex order is preserved as given; use ccw_ring() for a
// canonical ordering.
class RectilinearPolygon {
 public:
  RectilinearPolygon() = default;
  // Throws ConfigError unless the ring is a valid rectilinear polygon.
  explicit RectilinearPolygon(std::vector<Point> vertices);

  static RectilinearPolygon rectangle(double width, double height,
                                      Point origin = {0.0, 0.0});

  std::span<const Point> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  Segment edge(std::size_t i) const;

  double signed_area() const;
  // Inside or on the boundary (within eps).
  bool contains(Point p, double eps = 1e-9) const;
  double distance_to_boundary(Point p) const;
  // Axis-aligned bounding box as {min, max}.
  std::pair<Point, Point> bounds() const;

  // Nearest edge crossed by the ray from `origin` at `bearing_deg`.
  std::optional<RayHit> ray_cast(Point origin, double bearing_deg) const;

  // Vertices in counterclockwise order, starting from the vertex nearest
  // the origin (ties: smallest x, then smallest y).
  std::vector<Point> ccw_ring() const;

 private:
  std::vector<Point> vertices_;
};

// Orders a closed ring counterclockwise and rotates it so it starts at the
// point nearest (0, 0).
std::vector<Point> canonical_ring(std::vector<Point> ring);

}  // namespace aeromap
