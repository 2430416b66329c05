#include "aeromap/wall_mapper.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "aeromap/error.hpp"
#include "aeromap/kernels.hpp"

namespace aeromap {

std::string_view to_string(Orientation o) {
  return o == Orientation::vertical ? "vertical" : "horizontal";
}

Orientation orientation_from_string(std::string_view name) {
  if (name == "vertical") return Orientation::vertical;
  if (name == "horizontal") return Orientation::horizontal;
  throw ConfigError("unknown orientation: " + std::string(name));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMinNeighbors = 7;

Orientation flip(Orientation o) {
  return o == Orientation::vertical ? Orientation::horizontal : Orientation::vertical;
}

// (independent, dependent) coordinates of p for a line of orientation o.
double independent_of(Orientation o, Point p) { return o == Orientation::horizontal ? p.x : p.y; }
double dependent_of(Orientation o, Point p) { return o == Orientation::horizontal ? p.y : p.x; }

// Splits `idx` (already sorted by key) wherever consecutive keys differ by
// more than gap.
template <typename Key>
std::vector<std::vector<std::size_t>> split_at_gaps(std::vector<std::size_t> idx, Key key,
                                                    double gap) {
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  std::vector<std::vector<std::size_t>> runs;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i == 0 || key(idx[i]) - key(idx[i - 1]) > gap) runs.emplace_back();
    runs.back().push_back(idx[i]);
  }
  return runs;
}

std::vector<Orientation> label_orientations(const PointCloud& cloud, int k_neighbors) {
  const std::size_t n = cloud.size();
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = cloud[i].x;
    ys[i] = cloud[i].y;
  }
  // Sparse clouds keep a small neighbourhood, or the test stops being local.
  std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(k_neighbors, 1)),
                                        std::max<std::size_t>(kMinNeighbors, n / 16));
  k = std::min(k, n > 0 ? n - 1 : 0);
  std::vector<Orientation> labels(n, Orientation::horizontal);
  std::vector<double> d2(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n && k > 0; ++i) {
    kernels::squared_distances(xs, ys, xs[i], ys[i], d2);
    d2[i] = kInf;
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto closer = [&](std::size_t a, std::size_t b) {
      return d2[a] != d2[b] ? d2[a] < d2[b] : a < b;
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     order.end(), closer);
    double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t m = order[j];
      x0 = std::min(x0, xs[m]);
      x1 = std::max(x1, xs[m]);
      y0 = std::min(y0, ys[m]);
      y1 = std::max(y1, ys[m]);
    }
    labels[i] = (y1 - y0) > (x1 - x0) ? Orientation::vertical : Orientation::horizontal;
  }
  return labels;
}

// Clusters points of one orientation: bands along the dependent coordinate,
// then runs along the independent coordinate.
void cluster_orientation(const PointCloud& cloud, const std::vector<std::size_t>& members,
                         Orientation o, const GroupParams& params, Grouping& out) {
  const auto dep = [&](std::size_t i) { return dependent_of(o, cloud[i].point()); };
  const auto ind = [&](std::size_t i) { return independent_of(o, cloud[i].point()); };
  // Points whose gap-wide window along the dependent axis holds too small a
  // share of this orientation are strays; they would otherwise bridge bands.
  std::vector<std::size_t> kept;
  if (params.band_min_fraction > 0.0 && !members.empty()) {
    std::vector<double> keys;
    keys.reserve(members.size());
    for (std::size_t i : members) keys.push_back(dep(i));
    std::sort(keys.begin(), keys.end());
    const double need = params.band_min_fraction * static_cast<double>(members.size());
    for (std::size_t i : members) {
      const double v = dep(i);
      const auto lo = std::lower_bound(keys.begin(), keys.end(), v - 0.5 * params.gap_mm);
      const auto hi = std::upper_bound(keys.begin(), keys.end(), v + 0.5 * params.gap_mm);
      if (static_cast<double>(hi - lo) >= need) {
        kept.push_back(i);
      } else {
        out.rejected.push_back(cloud[i]);
      }
    }
  } else {
    kept = members;
  }
  for (auto& band : split_at_gaps(std::move(kept), dep, params.gap_mm)) {
    for (auto& run : split_at_gaps(std::move(band), ind, params.gap_mm)) {
      if (run.size() < params.min_cluster_size) {
        for (std::size_t i : run) out.rejected.push_back(cloud[i]);
        continue;
      }
      Cluster c;
      c.orientation = o;
      c.points.reserve(run.size());
      for (std::size_t i : run) c.points.push_back(cloud[i]);
      out.clusters.push_back(std::move(c));
    }
  }
}

}  // namespace

double LineModel::distance_to(Point p) const {
  return std::abs(dependent_of(orientation, p) - at(independent_of(orientation, p))) /
         std::sqrt(1.0 + b * b);
}

Grouping group_points(const PointCloud& cloud, const GroupParams& params) {
  Grouping out;
  if (cloud.empty()) return out;
  const auto labels = label_orientations(cloud, params.k_neighbors);
  for (Orientation o : {Orientation::vertical, Orientation::horizontal}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (labels[i] == o) members.push_back(i);
    }
    cluster_orientation(cloud, members, o, params, out);
  }
  if (out.clusters.empty()) {
    throw InsufficientDataError("all " + std::to_string(cloud.size()) +
                                " map points were rejected during grouping");
  }
  return out;
}

LineModel fit_line(const Cluster& cluster) {
  const std::size_t n = cluster.points.size();
  if (n < 2) throw DegenerateError("cluster needs at least 2 points to fit a line");
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = independent_of(cluster.orientation, cluster.points[i].point());
    ys[i] = dependent_of(cluster.orientation, cluster.points[i].point());
  }
  const double mx = kernels::sum(xs) / static_cast<double>(n);
  const double my = kernels::sum(ys) / static_cast<double>(n);
  const kernels::CrossSums s = kernels::centered_cross_sums(xs, ys, mx, my);
  if (!(s.sxx > 1e-12)) {
    throw DegenerateError("cluster has no spread along its independent coordinate (" +
                          std::string(to_string(cluster.orientation)) + ")");
  }
  LineModel line;
  line.orientation = cluster.orientation;
  line.b = s.sxy / s.sxx;
  line.a = my - line.b * mx;
  line.support = n;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  line.extent_min = *lo;
  line.extent_max = *hi;
  return line;
}

Point intersect(const LineModel& l1, const LineModel& l2) {
  if (l1.orientation == l2.orientation) {
    throw DegenerateError("cannot intersect two " + std::string(to_string(l1.orientation)) +
                          " lines (parallel class)");
  }
  const LineModel& h = l1.orientation == Orientation::horizontal ? l1 : l2;
  const LineModel& v = l1.orientation == Orientation::horizontal ? l2 : l1;
  // y = h.a + h.b x and x = v.a + v.b y
  const double det = 1.0 - h.b * v.b;
  if (std::abs(det) < 1e-9) throw DegenerateError("near-singular line intersection");
  const double x = (v.a + v.b * h.a) / det;
  return {x, h.a + h.b * x};
}

namespace {

std::vector<LineModel> fit_clusters(std::vector<Cluster>& clusters) {
  std::vector<LineModel> lines;
  std::vector<Cluster> kept;
  for (auto& c : clusters) {
    try {
      LineModel l = fit_line(c);
      if (std::abs(l.b) >= 1.0) {
        // Steeper than 45 degrees in this parameterization: it belongs to
        // the other orientation.
        c.orientation = flip(c.orientation);
        l = fit_line(c);
      }
      lines.push_back(l);
      kept.push_back(std::move(c));
    } catch (const DegenerateError&) {
    }
  }
  clusters = std::move(kept);
  return lines;
}

void drop_outliers(std::vector<Cluster>& clusters, const std::vector<LineModel>& lines,
                   double n_sigma) {
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    auto& pts = clusters[i].points;
    double ss = 0.0;
    for (const auto& p : pts) ss += std::pow(lines[i].distance_to(p.point()), 2);
    const double sigma = std::sqrt(ss / static_cast<double>(pts.size()));
    std::erase_if(pts, [&](const MapPoint& p) {
      return lines[i].distance_to(p.point()) > n_sigma * sigma;
    });
  }
}

// One reassignment pass: each clustered point moves to the line with the
// smallest residual among lines whose extent (widened by gap) covers it.
std::vector<Cluster> reassign(const std::vector<Cluster>& clusters,
                              const std::vector<LineModel>& lines, const GroupParams& params) {
  std::vector<Cluster> out(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) out[i].orientation = lines[i].orientation;
  for (const auto& c : clusters) {
    for (const auto& p : c.points) {
      std::size_t best = lines.size();
      double best_d = kInf;
      for (std::size_t j = 0; j < lines.size(); ++j) {
        const double u = independent_of(lines[j].orientation, p.point());
        if (u < lines[j].extent_min - params.gap_mm || u > lines[j].extent_max + params.gap_mm) {
          continue;
        }
        const double d = lines[j].distance_to(p.point());
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      if (best < lines.size()) out[best].points.push_back(p);
    }
  }
  std::erase_if(out, [&](const Cluster& c) { return c.points.size() < params.min_cluster_size; });
  return out;
}

struct Link {
  std::size_t partner = 0;
  double cost = kInf;
};

// For each end of each line, the perpendicular line whose intersection sits
// closest to that end and to one of the partner's own ends.
std::vector<std::array<Link, 2>> nearest_partners(const std::vector<LineModel>& lines,
                                                  const std::vector<bool>& alive) {
  std::vector<std::array<Link, 2>> links(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!alive[i]) continue;
    for (std::size_t j = 0; j < lines.size(); ++j) {
      if (!alive[j] || lines[j].orientation == lines[i].orientation) continue;
      Point c;
      try {
        c = intersect(lines[i], lines[j]);
      } catch (const DegenerateError&) {
        continue;
      }
      const double ui = independent_of(lines[i].orientation, c);
      const double uj = independent_of(lines[j].orientation, c);
      const double partner_end =
          std::min(std::abs(uj - lines[j].extent_min), std::abs(uj - lines[j].extent_max));
      const double d_min = std::abs(ui - lines[i].extent_min);
      const double d_max = std::abs(ui - lines[i].extent_max);
      const int end = d_min <= d_max ? 0 : 1;
      const double cost = std::min(d_min, d_max) + partner_end;
      if (cost < links[i][end].cost) links[i][end] = {j, cost};
    }
  }
  return links;
}

std::vector<std::size_t> build_ring(const std::vector<LineModel>& lines) {
  std::vector<bool> alive(lines.size(), true);
  for (;;) {
    const auto links = nearest_partners(lines, alive);
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!alive[i]) continue;
      bool ok = links[i][0].cost < kInf && links[i][1].cost < kInf &&
                links[i][0].partner != links[i][1].partner;
      for (int end = 0; ok && end < 2; ++end) {
        const std::size_t j = links[i][end].partner;
        ok = links[j][0].partner == i || links[j][1].partner == i;
      }
      if (!ok) bad.push_back(i);
    }
    const auto alive_count = std::count(alive.begin(), alive.end(), true);
    if (bad.empty()) {
      // Walk the cycle through the best-supported line.
      std::size_t start = lines.size();
      for (std::size_t i = 0; i < lines.size(); ++i) {
        if (alive[i] && (start == lines.size() || lines[i].support > lines[start].support)) {
          start = i;
        }
      }
      std::vector<std::size_t> ring{start};
      std::size_t prev = start;
      std::size_t cur = links[start][1].partner;
      while (cur != start && ring.size() <= lines.size()) {
        ring.push_back(cur);
        const std::size_t next =
            links[cur][0].partner == prev ? links[cur][1].partner : links[cur][0].partner;
        prev = cur;
        cur = next;
      }
      if (cur != start) break;
      return ring;
    }
    if (alive_count <= 4) break;
    // Drop the weakest inconsistent line and retry.
    const std::size_t weakest = *std::min_element(
        bad.begin(), bad.end(),
        [&](std::size_t a, std::size_t b) { return lines[a].support < lines[b].support; });
    alive[weakest] = false;
  }
  throw InsufficientDataError("could not link fitted walls into a closed ring");
}

}  // namespace

WallModel wall_model_from_ring(std::vector<LineModel> ring) {
  const std::size_t n = ring.size();
  auto corners_of = [](const std::vector<LineModel>& r) {
    std::vector<Point> c(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) c[i] = intersect(r[(i + r.size() - 1) % r.size()], r[i]);
    return c;
  };
  std::vector<Point> corners = corners_of(ring);
  double twice_area = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = corners[i];
    const Point b = corners[(i + 1) % n];
    twice_area += a.x * b.y - b.x * a.y;
  }
  if (twice_area < 0.0) {
    std::reverse(ring.begin(), ring.end());
    corners = corners_of(ring);
  }
  std::size_t start = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double di = std::hypot(corners[i].x, corners[i].y);
    const double ds = std::hypot(corners[start].x, corners[start].y);
    if (di < ds || (di == ds && (corners[i].x < corners[start].x ||
                                 (corners[i].x == corners[start].x && corners[i].y < corners[start].y)))) {
      start = i;
    }
  }
  std::rotate(ring.begin(), ring.begin() + static_cast<std::ptrdiff_t>(start), ring.end());
  std::rotate(corners.begin(), corners.begin() + static_cast<std::ptrdiff_t>(start), corners.end());
  WallModel model;
  model.wall_lengths.resize(n);
  for (std::size_t i = 0; i < n; ++i) model.wall_lengths[i] = distance(corners[i], corners[(i + 1) % n]);
  model.lines = std::move(ring);
  model.corners = std::move(corners);
  return model;
}

WallModel extract_walls(const PointCloud& cloud, const WallParams& params) {
  if (cloud.empty()) throw InsufficientDataError("empty point cloud");
  Grouping grouping = group_points(cloud, params.group);
  std::vector<Cluster> clusters = std::move(grouping.clusters);
  std::vector<LineModel> lines = fit_clusters(clusters);
  if (params.outlier_filter) {
    drop_outliers(clusters, lines, params.outlier_sigma);
    std::erase_if(clusters, [&](const Cluster& c) {
      return c.points.size() < params.group.min_cluster_size;
    });
    lines = fit_clusters(clusters);
  }
  for (int pass = 0; pass < params.refine_passes; ++pass) {
    auto next = reassign(clusters, lines, params.group);
    auto next_lines = fit_clusters(next);
    const bool same = next_lines == lines;
    clusters = std::move(next);
    lines = std::move(next_lines);
    if (same) break;
  }
  std::size_t vertical = 0, horizontal = 0;
  for (const auto& l : lines) (l.orientation == Orientation::vertical ? vertical : horizontal)++;
  if (vertical < 2 || horizontal < 2) {
    throw InsufficientDataError("need at least 2 walls per orientation, found " +
                                std::to_string(vertical) + " vertical and " +
                                std::to_string(horizontal) + " horizontal");
  }
  const auto order = build_ring(lines);
  std::vector<LineModel> ring;
  for (std::size_t i : order) ring.push_back(lines[i]);
  std::size_t rv = 0, rh = 0;
  for (const auto& l : ring) (l.orientation == Orientation::vertical ? rv : rh)++;
  if (rv < 2 || rh < 2 || rv != rh) {
    throw InsufficientDataError("linked wall ring is not rectilinear");
  }
  return wall_model_from_ring(std::move(ring));
}

ErrorReport evaluate_map(const WallModel& estimated, const RectilinearPolygon& truth,
                         const std::optional<std::vector<Point>>& gas_truth,
                         const std::optional<std::vector<Point>>& gas_estimated) {
  const std::vector<Point> t = truth.ccw_ring();
  const std::vector<Point>& e = estimated.corners;
  const std::size_t n = t.size();
  if (e.size() != n) throw TopologyMismatchError(e.size(), n);

  // Best alignment over rotations and reflection of the estimated ring.
  std::vector<Point> aligned;
  double best = kInf;
  for (int reflect = 0; reflect < 2; ++reflect) {
    for (std::size_t shift = 0; shift < n; ++shift) {
      std::vector<Point> cand(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = reflect ? (shift + n - i) % n : (shift + i) % n;
        cand[i] = e[k];
      }
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += distance(cand[i], t[i]);
      if (total < best) {
        best = total;
        aligned = std::move(cand);
      }
    }
  }

  ErrorReport r;
  for (std::size_t i = 0; i < n; ++i) {
    const double est = distance(aligned[i], aligned[(i + 1) % n]);
    const double tru = distance(t[i], t[(i + 1) % n]);
    r.estimated_lengths.push_back(est);
    r.true_lengths.push_back(tru);
    r.wall_length_mape.push_back(std::abs(est - tru) / tru * 100.0);
    r.corner_displacement_mm.push_back(distance(aligned[i], t[i]));
  }
  r.mean_wall_mape = std::accumulate(r.wall_length_mape.begin(), r.wall_length_mape.end(), 0.0) /
                     static_cast<double>(n);

  if (gas_truth && gas_estimated && !gas_truth->empty() && !gas_estimated->empty()) {
    // Greedy nearest matching, closest pairs first.
    struct Pair {
      double d;
      std::size_t ti, ei;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < gas_truth->size(); ++i) {
      for (std::size_t j = 0; j < gas_estimated->size(); ++j) {
        pairs.push_back({distance((*gas_truth)[i], (*gas_estimated)[j]), i, j});
      }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
    std::vector<bool> used_t(gas_truth->size()), used_e(gas_estimated->size());
    double sx = 0.0, sy = 0.0;
    std::size_t nx = 0, ny = 0;
    for (const auto& p : pairs) {
      if (used_t[p.ti] || used_e[p.ei]) continue;
      used_t[p.ti] = used_e[p.ei] = true;
      const Point tp = (*gas_truth)[p.ti];
      const Point ep = (*gas_estimated)[p.ei];
      if (tp.x != 0.0) {
        sx += std::abs(ep.x - tp.x) / std::abs(tp.x) * 100.0;
        ++nx;
      }
      if (tp.y != 0.0) {
        sy += std::abs(ep.y - tp.y) / std::abs(tp.y) * 100.0;
        ++ny;
      }
    }
    if (nx > 0) r.gas_x_mape = sx / static_cast<double>(nx);
    if (ny > 0) r.gas_y_mape = sy / static_cast<double>(ny);
  }
  return r;
}

std::vector<Point> locate_gas_peaks(const MissionLog& log, Species species,
                                    const PeakParams& params) {
  const auto& frames = log.frames;
  const std::size_t n = frames.size();
  if (n < 2) return {};
  const Channel channel = species == Species::voc   ? Channel::voc
                          : species == Species::co2 ? Channel::co2
                                                    : Channel::smoke;
  std::vector<double> xs(n), ys(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = frames[i].pose.x;
    ys[i] = frames[i].pose.y;
    v[i] = frames[i].frame.value(channel);
  }
  std::vector<double> d2(n);
  double radius = params.neighbor_radius_mm;
  if (radius <= 0.0) {
    std::vector<double> nearest;
    for (std::size_t i = 0; i < n; ++i) {
      kernels::squared_distances(xs, ys, xs[i], ys[i], d2);
      double m = kInf;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && d2[j] > 0.0) m = std::min(m, d2[j]);
      }
      if (m < kInf) nearest.push_back(std::sqrt(m));
    }
    if (nearest.empty()) return {};
    std::nth_element(nearest.begin(), nearest.begin() + static_cast<std::ptrdiff_t>(nearest.size() / 2),
                     nearest.end());
    radius = 1.5 * nearest[nearest.size() / 2];
  }
  const double r2 = radius * radius;
  const double floor_value = *std::min_element(v.begin(), v.end());

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    kernels::squared_distances(xs, ys, xs[i], ys[i], d2);
    bool is_max = true;
    bool strictly_above_one = false;
    for (std::size_t j = 0; j < n && is_max; ++j) {
      if (j == i || d2[j] > r2) continue;
      if (v[j] > v[i]) is_max = false;
      if (v[j] < v[i]) strictly_above_one = true;
    }
    if (is_max && strictly_above_one && v[i] - floor_value >= params.min_rise) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    if (v[a] != v[b]) return v[a] > v[b];
    return frames[a].frame.timestamp_ms < frames[b].frame.timestamp_ms;
  });
  std::vector<Point> peaks;
  for (std::size_t i : candidates) {
    const Point p{xs[i], ys[i]};
    // Plateaus: keep only the first-ranked sample of adjacent equal maxima.
    const bool shadowed = std::any_of(peaks.begin(), peaks.end(), [&](Point q) {
      const double dx = q.x - p.x, dy = q.y - p.y;
      return dx * dx + dy * dy <= r2;
    });
    if (!shadowed) peaks.push_back(p);
  }
  return peaks;
}

}  // namespace aeromap
