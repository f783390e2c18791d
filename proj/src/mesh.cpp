#include "savflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>

namespace savflow::mesh {

namespace {

std::uint64_t edge_key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<BoundaryEdge> boundary_edges)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), boundary_edges_(std::move(boundary_edges)) {
  validate_and_index();
}

void Mesh::validate_and_index() {
  const std::size_t nv = vertices_.size();
  if (triangles_.empty()) throw MeshError("mesh has no triangles");
  std::vector<char> used(nv, 0);
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (auto v : tri) {
      if (v >= nv)
        throw MeshError("triangle " + std::to_string(t) + " references vertex " + std::to_string(v) + " but mesh has " +
                        std::to_string(nv) + " vertices");
      used[v] = 1;
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw MeshError("triangle " + std::to_string(t) + " repeats a vertex");
    if (!(signed_area(t) > 0.0))
      throw MeshError("triangle " + std::to_string(t) + " is not counter-clockwise (signed area " +
                      std::to_string(signed_area(t)) + ")");
  }
  for (std::size_t v = 0; v < nv; ++v)
    if (!used[v]) throw MeshError("vertex " + std::to_string(v) + " is not used by any triangle");

  // Edge enumeration: key -> (edge id, incident count)
  std::unordered_map<std::uint64_t, std::pair<std::size_t, int>> index;
  index.reserve(triangles_.size() * 3);
  std::vector<std::uint64_t> keys;
  for (const auto& tri : triangles_) {
    for (int j = 0; j < 3; ++j) {
      auto key = edge_key(tri[j], tri[(j + 1) % 3]);
      auto [it, inserted] = index.try_emplace(key, 0, 0);
      if (inserted) keys.push_back(key);
      if (++it->second.second > 2) throw MeshError("edge shared by more than two triangles (non-manifold mesh)");
    }
  }
  std::sort(keys.begin(), keys.end());
  edges_.resize(keys.size());
  for (std::size_t e = 0; e < keys.size(); ++e) {
    edges_[e] = {static_cast<std::size_t>(keys[e] >> 32), static_cast<std::size_t>(keys[e] & 0xffffffffu)};
    index[keys[e]].first = e;
  }
  triangle_edges_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t)
    for (int j = 0; j < 3; ++j) triangle_edges_[t][j] = index[edge_key(triangles_[t][j], triangles_[t][(j + 1) % 3])].first;

  std::vector<int> covered(edges_.size(), 0);
  for (std::size_t b = 0; b < boundary_edges_.size(); ++b) {
    const auto& be = boundary_edges_[b];
    auto it = index.find(edge_key(be.v0, be.v1));
    if (be.v0 >= nv || be.v1 >= nv || it == index.end())
      throw MeshError("boundary edge " + std::to_string(b) + " is not an edge of the mesh");
    if (it->second.second != 1)
      throw MeshError("boundary edge " + std::to_string(b) + " is interior (shared by two triangles)");
    if (covered[it->second.first]++) throw MeshError("boundary edge " + std::to_string(b) + " listed twice");
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    auto count = index[edge_key(edges_[e].v0, edges_[e].v1)].second;
    if (count == 1 && !covered[e])
      throw MeshError("boundary edge (" + std::to_string(edges_[e].v0) + ", " + std::to_string(edges_[e].v1) +
                      ") has no marker");
  }

  std::unordered_map<std::size_t, std::pair<std::size_t, int>> owner;
  for (std::size_t t = 0; t < triangles_.size(); ++t)
    for (int j = 0; j < 3; ++j) owner[triangle_edges_[t][j]] = {t, j};
  boundary_owner_.resize(boundary_edges_.size());
  for (std::size_t b = 0; b < boundary_edges_.size(); ++b)
    boundary_owner_[b] = owner[index[edge_key(boundary_edges_[b].v0, boundary_edges_[b].v1)].first];
}

double Mesh::signed_area(std::size_t t) const {
  const auto& a = vertices_[triangles_[t][0]];
  const auto& b = vertices_[triangles_[t][1]];
  const auto& c = vertices_[triangles_[t][2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double Mesh::area() const {
  double total = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) total += signed_area(t);
  return total;
}

double Mesh::diameter(std::size_t t) const {
  const auto& tri = triangles_[t];
  double d = 0.0;
  for (int j = 0; j < 3; ++j) d = std::max(d, distance(vertices_[tri[j]], vertices_[tri[(j + 1) % 3]]));
  return d;
}

double Mesh::max_edge_length() const {
  double h = 0.0;
  for (const auto& e : edges_) h = std::max(h, distance(vertices_[e.v0], vertices_[e.v1]));
  return h;
}

double Mesh::min_edge_length() const {
  double h = std::numeric_limits<double>::infinity();
  for (const auto& e : edges_) h = std::min(h, distance(vertices_[e.v0], vertices_[e.v1]));
  return h;
}

std::set<int> Mesh::markers() const {
  std::set<int> out;
  for (const auto& be : boundary_edges_) out.insert(be.marker);
  return out;
}

bool operator==(const Mesh& a, const Mesh& b) {
  if (a.n_vertices() != b.n_vertices() || a.triangles() != b.triangles() ||
      a.boundary_edges().size() != b.boundary_edges().size())
    return false;
  for (std::size_t i = 0; i < a.n_vertices(); ++i)
    if (a.vertices()[i].x != b.vertices()[i].x || a.vertices()[i].y != b.vertices()[i].y) return false;
  for (std::size_t i = 0; i < a.boundary_edges().size(); ++i) {
    const auto& x = a.boundary_edges()[i];
    const auto& y = b.boundary_edges()[i];
    if (x.v0 != y.v0 || x.v1 != y.v1 || x.marker != y.marker) return false;
  }
  return true;
}

Mesh build_unit_square(std::size_t n) {
  if (n == 0) throw MeshError("build_unit_square: n must be at least 1");
  const auto id = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
  std::vector<Point> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t i = 0; i <= n; ++i)
      vertices.push_back({static_cast<double>(i) / static_cast<double>(n), static_cast<double>(j) / static_cast<double>(n)});
  std::vector<Triangle> triangles;
  triangles.reserve(2 * n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  std::vector<BoundaryEdge> boundary;
  for (std::size_t i = 0; i < n; ++i) {
    boundary.push_back({id(i, 0), id(i + 1, 0), markers::dirichlet});
    boundary.push_back({id(n, i), id(n, i + 1), markers::dirichlet});
    boundary.push_back({id(i + 1, n), id(i, n), markers::dirichlet});
    boundary.push_back({id(0, i + 1), id(0, i), markers::dirichlet});
  }
  return Mesh(std::move(vertices), std::move(triangles), std::move(boundary));
}

Mesh refine_uniform(const Mesh& m) {
  std::vector<Point> vertices = m.vertices();
  const std::size_t nv = vertices.size();
  for (const auto& e : m.edges()) {
    const auto& a = m.vertices()[e.v0];
    const auto& b = m.vertices()[e.v1];
    vertices.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
  }
  std::vector<Triangle> triangles;
  triangles.reserve(4 * m.n_triangles());
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles()[t];
    const auto& te = m.triangle_edges()[t];
    const std::size_t m01 = nv + te[0], m12 = nv + te[1], m20 = nv + te[2];
    triangles.push_back({tri[0], m01, m20});
    triangles.push_back({m01, tri[1], m12});
    triangles.push_back({m20, m12, tri[2]});
    triangles.push_back({m01, m12, m20});
  }
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_id;
  for (std::size_t e = 0; e < m.edges().size(); ++e) edge_id[{m.edges()[e].v0, m.edges()[e].v1}] = e;
  std::vector<BoundaryEdge> boundary;
  boundary.reserve(2 * m.boundary_edges().size());
  for (const auto& be : m.boundary_edges()) {
    const std::size_t mid = nv + edge_id.at({std::min(be.v0, be.v1), std::max(be.v0, be.v1)});
    boundary.push_back({be.v0, mid, be.marker});
    boundary.push_back({mid, be.v1, be.marker});
  }
  return Mesh(std::move(vertices), std::move(triangles), std::move(boundary));
}

namespace {

/// Reads the next non-comment, non-blank line; tracks line numbers.
class LineReader {
public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream next(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return std::istringstream(line);
    }
    throw MeshError("mesh file: unexpected end of file while reading " + std::string(what));
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw MeshError("mesh file line " + std::to_string(line_no_) + ": " + msg);
  }

  std::size_t line_no() const { return line_no_; }

private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

template <typename... T>
void read_fields(LineReader& reader, std::istringstream& ss, const char* what, T&... fields) {
  if (!((ss >> fields) && ...)) reader.fail(std::string("malformed ") + what);
  std::string rest;
  if (ss >> rest) reader.fail(std::string("trailing data after ") + what);
}

}  // namespace

Mesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path.string());
  LineReader reader(in);
  long long nv = 0, nt = 0, nb = 0;
  {
    auto ss = reader.next("header");
    read_fields(reader, ss, "header 'nv nt nb'", nv, nt, nb);
    if (nv < 3 || nt < 1 || nb < 3) reader.fail("header counts must satisfy nv >= 3, nt >= 1, nb >= 3");
  }
  std::vector<Point> vertices(static_cast<std::size_t>(nv));
  for (auto& p : vertices) {
    auto ss = reader.next("vertex");
    read_fields(reader, ss, "vertex 'x y'", p.x, p.y);
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) reader.fail("non-finite vertex coordinate");
  }
  auto check_index = [&](long long v) {
    if (v < 0 || v >= nv)
      reader.fail("vertex index " + std::to_string(v) + " out of range [0, " + std::to_string(nv) + ")");
    return static_cast<std::size_t>(v);
  };
  std::vector<Triangle> triangles(static_cast<std::size_t>(nt));
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    auto ss = reader.next("triangle");
    long long a = 0, b = 0, c = 0;
    read_fields(reader, ss, "triangle 'v0 v1 v2'", a, b, c);
    triangles[t] = {check_index(a), check_index(b), check_index(c)};
    const auto& p0 = vertices[triangles[t][0]];
    const auto& p1 = vertices[triangles[t][1]];
    const auto& p2 = vertices[triangles[t][2]];
    if ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y) <= 0.0)
      reader.fail("triangle " + std::to_string(t) + " has non-positive signed area (orientation must be CCW)");
  }
  std::vector<BoundaryEdge> boundary(static_cast<std::size_t>(nb));
  for (auto& be : boundary) {
    auto ss = reader.next("boundary edge");
    long long a = 0, b = 0;
    read_fields(reader, ss, "boundary edge 'v0 v1 marker'", a, b, be.marker);
    be.v0 = check_index(a);
    be.v1 = check_index(b);
  }
  return Mesh(std::move(vertices), std::move(triangles), std::move(boundary));
}

void write_mesh(const Mesh& m, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw MeshError("cannot write mesh file " + path.string());
    out << "# nv nt nb, then vertices, triangles (CCW, 0-based), boundary edges with markers\n";
    out << m.n_vertices() << ' ' << m.n_triangles() << ' ' << m.boundary_edges().size() << '\n';
    out << std::setprecision(17);
    for (const auto& p : m.vertices()) out << p.x << ' ' << p.y << '\n';
    for (const auto& t : m.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (const auto& be : m.boundary_edges()) out << be.v0 << ' ' << be.v1 << ' ' << be.marker << '\n';
    if (!out) throw MeshError("failed while writing mesh file " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace savflow::mesh
