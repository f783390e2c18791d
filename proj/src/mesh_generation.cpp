#include "delaunay.hpp"
#include "savflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <unordered_map>

namespace savflow::mesh {

namespace {

constexpr double pi = std::numbers::pi;

/// Splits the quad (a, b, c, d), listed counter-clockwise, along its shorter
/// diagonal and appends two CCW triangles.
void split_quad(const std::vector<Point>& v, std::size_t a, std::size_t b, std::size_t c, std::size_t d,
                std::vector<Triangle>& out) {
  const auto len2 = [&](std::size_t i, std::size_t j) {
    return (v[i].x - v[j].x) * (v[i].x - v[j].x) + (v[i].y - v[j].y) * (v[i].y - v[j].y);
  };
  if (len2(a, c) <= len2(b, d)) {
    out.push_back({a, b, c});
    out.push_back({a, c, d});
  } else {
    out.push_back({a, b, d});
    out.push_back({b, c, d});
  }
}

/// Positions in [0, 1] with geometric growth of ratio q from the first
/// interval; n intervals.
std::vector<double> geometric_fractions(std::size_t n, double q) {
  std::vector<double> s(n + 1, 0.0);
  double step = 1.0, total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    total += step;
    s[k + 1] = total;
    step *= q;
  }
  for (auto& x : s) x /= total;
  return s;
}

/// Ratio q such that n geometric intervals starting at `first` sum to `length`.
double geometric_ratio(std::size_t n, double first, double length) {
  if (first * static_cast<double>(n) >= length) return 1.0;
  double lo = 1.0, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    const double q = 0.5 * (lo + hi);
    const double sum = first * (std::pow(q, static_cast<double>(n)) - 1.0) / (q - 1.0);
    (sum > length ? hi : lo) = q;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

// The channel is meshed as two structured blocks: an O-grid between the
// cylinder and the square [0,0.41]^2 around it, and a stretched rectangular
// grid over the downstream part [0.41,2.2]x[0,0.41].
Mesh build_channel_cylinder(double h_target) {
  constexpr double length = 2.2, height = 0.41;
  constexpr double cx = 0.2, cy = 0.2, radius = 0.05;
  if (!(h_target > 0.0)) throw MeshError("build_channel_cylinder: h_target must be positive");
  const auto m = static_cast<std::size_t>(std::ceil(height / h_target - 1e-9));  // divisions per box side
  if (4 * m < 16 || m < 4)
    throw MeshError("build_channel_cylinder: h_target " + std::to_string(h_target) +
                    " cannot resolve the cylinder (needs at least 16 edges on the circle, h_target <= 0.1025)");
  const std::size_t n_theta = 4 * m;
  const double h_box = height / static_cast<double>(m);
  const double h_circle = 2.0 * pi * radius / static_cast<double>(n_theta);

  // Radial layers: geometric growth from the circle spacing to the box spacing.
  const double mean_gap = 0.16;
  std::size_t n_r = 2;
  while (true) {
    const double q = geometric_ratio(n_r, h_circle, mean_gap);
    if (h_circle * std::pow(q, static_cast<double>(n_r - 1)) <= 1.05 * h_box || n_r > 200) break;
    ++n_r;
  }
  const auto rho = geometric_fractions(n_r, geometric_ratio(n_r, h_circle, mean_gap));

  std::vector<Point> vertices;
  auto ring_id = [&](std::size_t i, std::size_t k) { return k * n_theta + (i % n_theta); };
  for (std::size_t k = 0; k <= n_r; ++k) {
    for (std::size_t i = 0; i < n_theta; ++i) {
      const double theta = -pi / 4.0 + 2.0 * pi * static_cast<double>(i) / static_cast<double>(n_theta);
      const Point on_circle{cx + radius * std::cos(theta), cy + radius * std::sin(theta)};
      const std::size_t side = i / m;
      const double s = static_cast<double>(i % m) / static_cast<double>(m);
      Point on_box;
      switch (side) {
        case 0: on_box = {height, s * height}; break;
        case 1: on_box = {height * (1.0 - s), height}; break;
        case 2: on_box = {0.0, height * (1.0 - s)}; break;
        default: on_box = {s * height, 0.0}; break;
      }
      if (k == 0) {
        vertices.push_back(on_circle);
      } else if (k == n_r) {
        vertices.push_back(on_box);
      } else {
        const double r = rho[k];
        vertices.push_back({on_circle.x + r * (on_box.x - on_circle.x), on_circle.y + r * (on_box.y - on_circle.y)});
      }
    }
  }

  std::vector<Triangle> triangles;
  for (std::size_t k = 0; k < n_r; ++k)
    for (std::size_t i = 0; i < n_theta; ++i)
      split_quad(vertices, ring_id(i, k), ring_id(i, k + 1), ring_id(i + 1, k + 1), ring_id(i + 1, k), triangles);

  // Downstream block: column 0 is the right side of the box (ring n_r, i = 0..m).
  std::vector<double> xs{height};
  {
    const double dx_max = 2.0 * h_box;
    double dx = h_box;
    while (xs.back() < length - 1e-12) {
      xs.push_back(xs.back() + dx);
      dx = std::min(dx * 1.04, dx_max);
    }
    // Stretch the columns so that the last lands exactly on the outflow.
    const double scale = (length - height) / (xs.back() - height);
    for (auto& x : xs) x = height + (x - height) * scale;
    xs.back() = length;
  }
  const std::size_t n_x = xs.size() - 1;
  std::vector<std::size_t> column_ids((n_x + 1) * (m + 1));
  auto block_id = [&](std::size_t j, std::size_t r) -> std::size_t& { return column_ids[j * (m + 1) + r]; };
  for (std::size_t r = 0; r <= m; ++r) block_id(0, r) = ring_id(r, n_r);
  for (std::size_t j = 1; j <= n_x; ++j) {
    for (std::size_t r = 0; r <= m; ++r) {
      block_id(j, r) = vertices.size();
      vertices.push_back({xs[j], height * static_cast<double>(r) / static_cast<double>(m)});
    }
  }
  for (std::size_t j = 0; j < n_x; ++j)
    for (std::size_t r = 0; r < m; ++r)
      split_quad(vertices, block_id(j, r), block_id(j + 1, r), block_id(j + 1, r + 1), block_id(j, r + 1), triangles);

  std::vector<BoundaryEdge> boundary;
  for (std::size_t i = 0; i < n_theta; ++i) boundary.push_back({ring_id(i + 1, 0), ring_id(i, 0), markers::cylinder});
  for (std::size_t i = m; i < n_theta; ++i) {
    const std::size_t side = i / m;
    const int marker = side == 2 ? markers::inflow : markers::walls;
    boundary.push_back({ring_id(i, n_r), ring_id(i + 1, n_r), marker});
  }
  for (std::size_t j = 0; j < n_x; ++j) {
    boundary.push_back({block_id(j, 0), block_id(j + 1, 0), markers::walls});
    boundary.push_back({block_id(j + 1, m), block_id(j, m), markers::walls});
  }
  for (std::size_t r = 0; r < m; ++r) boundary.push_back({block_id(n_x, r), block_id(n_x, r + 1), markers::outflow});

  return Mesh(std::move(vertices), std::move(triangles), std::move(boundary));
}

namespace {

struct SizedDomain {
  std::function<double(const Point&)> distance;  // negative inside
  std::function<double(const Point&)> size;
};

struct BoundaryLoop {
  std::vector<std::size_t> vertices;  // consecutive points of a closed loop
  int marker;
};

/// Smooths interior points with a spring model (rest lengths scaled from the
/// size function) and retriangulates by Delaunay after every sweep. Boundary
/// points stay fixed.
Mesh spring_mesh(std::vector<Point> points, std::size_t n_fixed, const std::vector<BoundaryLoop>& loops,
                 const SizedDomain& domain, std::size_t iterations) {
  auto triangulate = [&](const std::vector<Point>& pts) {
    auto tris = detail::delaunay(pts);
    std::vector<Triangle> kept;
    kept.reserve(tris.size());
    for (const auto& t : tris) {
      const Point c{(pts[t[0]].x + pts[t[1]].x + pts[t[2]].x) / 3.0, (pts[t[0]].y + pts[t[1]].y + pts[t[2]].y) / 3.0};
      if (domain.distance(c) < 0.0) kept.push_back(t);
    }
    return kept;
  };

  for (std::size_t it = 0; it < iterations; ++it) {
    const auto tris = triangulate(points);
    std::map<std::pair<std::size_t, std::size_t>, int> bars;
    for (const auto& t : tris)
      for (int j = 0; j < 3; ++j) bars.emplace(std::minmax(t[j], t[(j + 1) % 3]), 0);
    double sum_l2 = 0.0, sum_h2 = 0.0;
    std::vector<std::tuple<std::size_t, std::size_t, double, double>> bar_data;
    bar_data.reserve(bars.size());
    for (const auto& [e, _] : bars) {
      const auto& a = points[e.first];
      const auto& b = points[e.second];
      const double l = std::hypot(a.x - b.x, a.y - b.y);
      const double h = domain.size({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
      sum_l2 += l * l;
      sum_h2 += h * h;
      bar_data.emplace_back(e.first, e.second, l, h);
    }
    const double scale = 1.2 * std::sqrt(sum_l2 / sum_h2);
    std::vector<Point> force(points.size(), Point{0.0, 0.0});
    for (const auto& [i, j, l, h] : bar_data) {
      const double f = std::max(h * scale - l, 0.0);
      const double fx = f * (points[i].x - points[j].x) / l;
      const double fy = f * (points[i].y - points[j].y) / l;
      force[i].x += fx;
      force[i].y += fy;
      force[j].x -= fx;
      force[j].y -= fy;
    }
    for (std::size_t i = n_fixed; i < points.size(); ++i) {
      const Point moved{points[i].x + 0.2 * force[i].x, points[i].y + 0.2 * force[i].y};
      if (domain.distance(moved) < -0.3 * domain.size(moved)) points[i] = moved;
    }
  }

  auto triangles = triangulate(points);

  // Boundary recovery: every hull or hole edge must be a chord between
  // consecutive points of one boundary loop.
  std::map<std::pair<std::size_t, std::size_t>, int> count;
  for (const auto& t : triangles)
    for (int j = 0; j < 3; ++j) ++count[std::minmax(t[j], t[(j + 1) % 3])];
  std::map<std::pair<std::size_t, std::size_t>, int> loop_marker;
  for (const auto& loop : loops) {
    const auto& lv = loop.vertices;
    for (std::size_t k = 0; k < lv.size(); ++k) loop_marker[std::minmax(lv[k], lv[(k + 1) % lv.size()])] = loop.marker;
  }
  std::vector<BoundaryEdge> boundary;
  for (const auto& [e, c] : count) {
    if (c != 1) continue;
    auto it = loop_marker.find(e);
    if (it == loop_marker.end())
      throw MeshError("mesh generation: boundary edge (" + std::to_string(e.first) + ", " + std::to_string(e.second) +
                      ") does not follow a boundary curve; decrease h_target");
    boundary.push_back({e.first, e.second, it->second});
  }
  if (boundary.size() != loop_marker.size())
    throw MeshError("mesh generation: boundary curve not recovered; decrease h_target");

  // Drop points that ended up outside every kept triangle.
  std::vector<std::size_t> remap(points.size(), SIZE_MAX);
  std::vector<Point> used;
  for (const auto& t : triangles)
    for (auto v : t)
      if (remap[v] == SIZE_MAX) remap[v] = 0;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (remap[i] == 0) {
      remap[i] = used.size();
      used.push_back(points[i]);
    }
  for (auto& t : triangles)
    for (auto& v : t) v = remap[v];
  for (auto& b : boundary) {
    b.v0 = remap[b.v0];
    b.v1 = remap[b.v1];
  }
  return Mesh(std::move(used), std::move(triangles), std::move(boundary));
}

}  // namespace

Mesh build_offset_annulus(double h_target) {
  constexpr double r_outer = 1.0, r_inner = 0.1, cx = 0.5, cy = 0.0;
  if (!(h_target > 0.0)) throw MeshError("build_offset_annulus: h_target must be positive");
  if (h_target > 0.25)
    throw MeshError("build_offset_annulus: h_target " + std::to_string(h_target) +
                    " cannot resolve the gap between the circles (h_target <= 0.25)");
  const auto n_outer = static_cast<std::size_t>(std::ceil(2.0 * pi * r_outer / h_target));
  const auto n_inner = std::max<std::size_t>(24, static_cast<std::size_t>(std::ceil(2.0 * pi * r_inner / (0.4 * h_target))));
  const double h_inner = 2.0 * pi * r_inner / static_cast<double>(n_inner);

  SizedDomain domain;
  domain.distance = [=](const Point& p) {
    return std::max(std::hypot(p.x, p.y) - r_outer, r_inner - std::hypot(p.x - cx, p.y - cy));
  };
  domain.size = [=](const Point& p) {
    const double d = std::max(std::hypot(p.x - cx, p.y - cy) - r_inner, 0.0);
    return std::min(h_target, h_inner + 0.3 * d);
  };

  std::vector<Point> points;
  BoundaryLoop outer{{}, markers::outer_circle}, inner{{}, markers::inner_circle};
  for (std::size_t i = 0; i < n_outer; ++i) {
    const double t = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n_outer);
    outer.vertices.push_back(points.size());
    points.push_back({r_outer * std::cos(t), r_outer * std::sin(t)});
  }
  for (std::size_t i = 0; i < n_inner; ++i) {
    const double t = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n_inner);
    inner.vertices.push_back(points.size());
    points.push_back({cx + r_inner * std::cos(t), cy + r_inner * std::sin(t)});
  }
  const std::size_t n_fixed = points.size();

  // Interior seeds: a hexagonal lattice at the finest spacing, thinned by
  // rejection against the local size (fixed seed, so meshes are reproducible).
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double h0 = h_inner;
  const double dy = h0 * std::sqrt(3.0) / 2.0;
  for (long row = 0;; ++row) {
    const double y = -r_outer + static_cast<double>(row) * dy;
    if (y > r_outer) break;
    const double shift = (row % 2) ? 0.5 * h0 : 0.0;
    for (double x = -r_outer + shift; x <= r_outer; x += h0) {
      const Point p{x, y};
      const double hp = domain.size(p);
      const double keep = (h0 * h0) / (hp * hp);
      const double draw = uniform(rng);
      if (domain.distance(p) > -0.5 * hp) continue;
      if (draw > keep) continue;
      points.push_back(p);
    }
  }
  return spring_mesh(std::move(points), n_fixed, {outer, inner}, domain, 40);
}

}  // namespace savflow::mesh
