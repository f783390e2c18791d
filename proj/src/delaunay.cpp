#include "delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace savflow::mesh::detail {

namespace {

struct Cell {
  std::array<std::size_t, 3> v;
  std::array<long, 3> nb;  // neighbour opposite v[j], -1 on the hull
  bool alive = true;
};

long double orient(const Point& a, const Point& b, const Point& c) {
  return (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
         (static_cast<long double>(c.x) - a.x) * (static_cast<long double>(b.y) - a.y);
}

/// Positive when d lies strictly inside the circumcircle of CCW (a, b, c).
long double incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
  const long double adx = static_cast<long double>(a.x) - d.x, ady = static_cast<long double>(a.y) - d.y;
  const long double bdx = static_cast<long double>(b.x) - d.x, bdy = static_cast<long double>(b.y) - d.y;
  const long double cdx = static_cast<long double>(c.x) - d.x, cdy = static_cast<long double>(c.y) - d.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

class Triangulator {
public:
  explicit Triangulator(std::span<const Point> input) : pts_(input.begin(), input.end()) {
    double xmin = pts_[0].x, xmax = xmin, ymin = pts_[0].y, ymax = ymin;
    for (const auto& p : pts_) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    n_input_ = pts_.size();
    pts_.push_back({cx - 40.0 * span, cy - 30.0 * span});
    pts_.push_back({cx + 40.0 * span, cy - 30.0 * span});
    pts_.push_back({cx, cy + 40.0 * span});
    cells_.push_back({{n_input_, n_input_ + 1, n_input_ + 2}, {-1, -1, -1}, true});
  }

  void insert_all() {
    // Insertion along a serpentine sweep of grid rows keeps walks short.
    double xmin = pts_[0].x, xmax = xmin, ymin = pts_[0].y, ymax = ymin;
    for (std::size_t i = 0; i < n_input_; ++i) {
      xmin = std::min(xmin, pts_[i].x);
      xmax = std::max(xmax, pts_[i].x);
      ymin = std::min(ymin, pts_[i].y);
      ymax = std::max(ymax, pts_[i].y);
    }
    const auto rows = static_cast<long>(std::max(1.0, std::sqrt(static_cast<double>(n_input_)) / 2.0));
    std::vector<std::size_t> order(n_input_);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const double dy = std::max(ymax - ymin, 1e-300) / static_cast<double>(rows);
    auto row_of = [&](std::size_t i) { return std::min(rows - 1, static_cast<long>((pts_[i].y - ymin) / dy)); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const long ra = row_of(a), rb = row_of(b);
      if (ra != rb) return ra < rb;
      return (ra % 2 == 0) ? pts_[a].x < pts_[b].x : pts_[a].x > pts_[b].x;
    });
    for (auto i : order) insert(i);
  }

  std::vector<Triangle> result() const {
    std::vector<Triangle> out;
    for (const auto& c : cells_) {
      if (!c.alive) continue;
      if (c.v[0] >= n_input_ || c.v[1] >= n_input_ || c.v[2] >= n_input_) continue;
      out.push_back({c.v[0], c.v[1], c.v[2]});
    }
    return out;
  }

private:
  long locate(const Point& p) const {
    long t = last_;
    if (t < 0 || !cells_[static_cast<std::size_t>(t)].alive) t = find_alive();
    for (std::size_t steps = 0; steps < cells_.size() + 8; ++steps) {
      const auto& c = cells_[static_cast<std::size_t>(t)];
      bool moved = false;
      for (int j = 0; j < 3; ++j) {
        const auto& a = pts_[c.v[(j + 1) % 3]];
        const auto& b = pts_[c.v[(j + 2) % 3]];
        if (orient(a, b, p) < 0 && c.nb[j] >= 0) {
          t = c.nb[j];
          moved = true;
          break;
        }
      }
      if (!moved) return t;
    }
    // Walk cycled on a degenerate configuration; fall back to a scan.
    for (std::size_t k = 0; k < cells_.size(); ++k) {
      const auto& c = cells_[k];
      if (!c.alive) continue;
      if (orient(pts_[c.v[0]], pts_[c.v[1]], p) >= 0 && orient(pts_[c.v[1]], pts_[c.v[2]], p) >= 0 &&
          orient(pts_[c.v[2]], pts_[c.v[0]], p) >= 0)
        return static_cast<long>(k);
    }
    throw MeshError("delaunay: point location failed");
  }

  long find_alive() const {
    for (std::size_t k = cells_.size(); k-- > 0;)
      if (cells_[k].alive) return static_cast<long>(k);
    return -1;
  }

  void insert(std::size_t pi) {
    const Point& p = pts_[pi];
    const long start = locate(p);

    std::vector<long> bad{start};
    std::vector<char> in_cavity(cells_.size(), 0);
    in_cavity[static_cast<std::size_t>(start)] = 1;
    for (std::size_t k = 0; k < bad.size(); ++k) {
      const auto& c = cells_[static_cast<std::size_t>(bad[k])];
      for (int j = 0; j < 3; ++j) {
        const long n = c.nb[j];
        if (n < 0 || in_cavity[static_cast<std::size_t>(n)]) continue;
        const auto& cn = cells_[static_cast<std::size_t>(n)];
        if (incircle(pts_[cn.v[0]], pts_[cn.v[1]], pts_[cn.v[2]], p) > 0) {
          in_cavity[static_cast<std::size_t>(n)] = 1;
          bad.push_back(n);
        }
      }
    }

    struct Rim {
      std::size_t a, b;
      long outer;
      long old;
    };
    std::vector<Rim> rim;
    for (long t : bad) {
      const auto& c = cells_[static_cast<std::size_t>(t)];
      for (int j = 0; j < 3; ++j) {
        const long n = c.nb[j];
        if (n >= 0 && in_cavity[static_cast<std::size_t>(n)]) continue;
        rim.push_back({c.v[(j + 1) % 3], c.v[(j + 2) % 3], n, t});
      }
    }
    for (long t : bad) cells_[static_cast<std::size_t>(t)].alive = false;

    std::unordered_map<std::size_t, long> by_first;
    std::vector<long> created;
    for (const auto& r : rim) {
      const long id = static_cast<long>(cells_.size());
      cells_.push_back({{r.a, r.b, pi}, {-1, -1, r.outer}, true});
      if (r.outer >= 0) {
        auto& o = cells_[static_cast<std::size_t>(r.outer)];
        for (int j = 0; j < 3; ++j)
          if (o.nb[j] == r.old) o.nb[j] = id;
      }
      by_first[r.a] = id;
      created.push_back(id);
    }
    for (long id : created) {
      auto& c = cells_[static_cast<std::size_t>(id)];
      // Edge (b, p) is opposite a and shared with the fan triangle starting at b.
      const long next = by_first.at(c.v[1]);
      c.nb[0] = next;
      cells_[static_cast<std::size_t>(next)].nb[1] = id;
    }
    last_ = created.back();
  }

  std::vector<Point> pts_;
  std::size_t n_input_ = 0;
  std::vector<Cell> cells_;
  long last_ = 0;
};

}  // namespace

std::vector<Triangle> delaunay(std::span<const Point> points) {
  if (points.size() < 3) throw MeshError("delaunay: need at least three points");
  Triangulator tri(points);
  tri.insert_all();
  return tri.result();
}

}  // namespace savflow::mesh::detail
