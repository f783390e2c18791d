#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace savflow::mesh {

class MeshError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Triangle = std::array<std::size_t, 3>;

struct BoundaryEdge {
  std::size_t v0 = 0;
  std::size_t v1 = 0;
  int marker = 0;
};

/// Undirected edge with v0 < v1.
struct Edge {
  std::size_t v0 = 0;
  std::size_t v1 = 0;
};

// Boundary markers of the built-in geometries.
namespace markers {
inline constexpr int dirichlet = 1;

inline constexpr int inflow = 1;
inline constexpr int outflow = 2;
inline constexpr int walls = 3;
inline constexpr int cylinder = 4;

inline constexpr int outer_circle = 1;
inline constexpr int inner_circle = 2;
}  // namespace markers

/// Conforming triangulation with counter-clockwise triangles and marked
/// boundary edges. Construction validates every invariant.
class Mesh {
public:
  Mesh() = default;
  Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles, std::vector<BoundaryEdge> boundary_edges);

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const noexcept { return boundary_edges_; }

  std::size_t n_vertices() const noexcept { return vertices_.size(); }
  std::size_t n_triangles() const noexcept { return triangles_.size(); }

  /// Unique edges, sorted; `triangle_edges()[t][j]` indexes the edge
  /// joining local vertices j and (j+1)%3.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::array<std::size_t, 3>>& triangle_edges() const noexcept { return triangle_edges_; }
  /// Triangle adjacent to each boundary edge, and its local edge slot.
  const std::vector<std::pair<std::size_t, int>>& boundary_edge_owner() const noexcept { return boundary_owner_; }

  double signed_area(std::size_t t) const;
  double area() const;
  /// Longest edge of triangle t.
  double diameter(std::size_t t) const;
  double max_edge_length() const;
  double min_edge_length() const;
  std::set<int> markers() const;

private:
  void validate_and_index();

  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<Edge> edges_;
  std::vector<std::array<std::size_t, 3>> triangle_edges_;
  std::vector<std::pair<std::size_t, int>> boundary_owner_;
};

bool operator==(const Mesh& a, const Mesh& b);

/// [0,1]^2 split into n x n squares, each cut along its lower-left to
/// upper-right diagonal. All boundary edges carry marker 1.
Mesh build_unit_square(std::size_t n);

/// Channel [0,2.2]x[0,0.41] without the disk of radius 0.05 centred at
/// (0.2,0.2). Markers: 1 inflow, 2 outflow, 3 walls, 4 cylinder.
Mesh build_channel_cylinder(double h_target);

/// Unit disk without the disk of radius 0.1 centred at (0.5,0).
/// Markers: 1 outer circle, 2 inner circle.
Mesh build_offset_annulus(double h_target);

/// Red refinement: each triangle split into four through edge midpoints.
Mesh refine_uniform(const Mesh& m);

Mesh read_mesh(const std::filesystem::path& path);
void write_mesh(const Mesh& m, const std::filesystem::path& path);

}  // namespace savflow::mesh
