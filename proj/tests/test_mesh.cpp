#include <doctest.h>

#include "savflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>

using namespace savflow::mesh;

namespace {

// Checks the invariants every generated mesh must satisfy.
void check_mesh_invariants(const Mesh& m) {
  for (std::size_t t = 0; t < m.n_triangles(); ++t) REQUIRE(m.signed_area(t) > 0.0);
  // Watertight: each vertex on the boundary has exactly two boundary edges.
  std::map<std::size_t, int> degree;
  for (const auto& be : m.boundary_edges()) {
    ++degree[be.v0];
    ++degree[be.v1];
  }
  for (const auto& [v, d] : degree) CHECK(d == 2);
  // Every edge with a single incident triangle carries a marker (enforced by
  // the constructor; recheck through the counts).
  std::map<std::pair<std::size_t, std::size_t>, int> count;
  for (const auto& t : m.triangles())
    for (int j = 0; j < 3; ++j) ++count[std::minmax(t[j], t[(j + 1) % 3])];
  std::size_t single = 0;
  for (const auto& [e, c] : count) single += (c == 1);
  CHECK(single == m.boundary_edges().size());
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("savflow_test_" + name);
}

}  // namespace

TEST_CASE("build_unit_square") {
  auto m1 = build_unit_square(1);
  CHECK(m1.n_vertices() == 4);
  CHECK(m1.n_triangles() == 2);
  CHECK(m1.boundary_edges().size() == 4);
  check_mesh_invariants(m1);

  auto m4 = build_unit_square(4);
  CHECK(m4.max_edge_length() == doctest::Approx(std::sqrt(2.0) / 4.0));
  CHECK(m4.n_vertices() == 25);
  CHECK(m4.n_triangles() == 32);
  CHECK(m4.markers() == std::set<int>{markers::dirichlet});
  for (std::size_t n : {1u, 3u, 7u, 16u}) {
    auto m = build_unit_square(n);
    CHECK(m.area() == doctest::Approx(1.0).epsilon(1e-14));
    check_mesh_invariants(m);
  }
  CHECK_THROWS_AS(build_unit_square(0), MeshError);
}

TEST_CASE("refine_uniform") {
  auto coarse = build_unit_square(1);
  auto fine = refine_uniform(coarse);
  CHECK(fine.n_triangles() == 4 * coarse.n_triangles());
  CHECK(fine.n_vertices() == coarse.n_vertices() + coarse.edges().size());
  CHECK(fine.area() == coarse.area());
  check_mesh_invariants(fine);

  // Same connectivity as the structured n=2 mesh, compared through a
  // canonical form: triangles as sorted coordinate triples.
  auto canonical = [](const Mesh& m) {
    std::vector<std::vector<std::pair<double, double>>> tris;
    for (const auto& t : m.triangles()) {
      std::vector<std::pair<double, double>> c;
      for (auto v : t) c.emplace_back(m.vertices()[v].x, m.vertices()[v].y);
      std::sort(c.begin(), c.end());
      tris.push_back(c);
    }
    std::sort(tris.begin(), tris.end());
    return tris;
  };
  CHECK(canonical(fine) == canonical(build_unit_square(2)));

  auto sq = build_unit_square(3);
  auto sq2 = refine_uniform(sq);
  CHECK(sq2.max_edge_length() == doctest::Approx(0.5 * sq.max_edge_length()).epsilon(1e-14));
  CHECK(sq2.area() == doctest::Approx(sq.area()).epsilon(1e-15));

  auto annulus = build_offset_annulus(0.2);
  auto refined = refine_uniform(annulus);
  CHECK(refined.area() == doctest::Approx(annulus.area()).epsilon(1e-13));
  CHECK(refined.markers() == annulus.markers());
  check_mesh_invariants(refined);
}

TEST_CASE("channel mesh element size follows the target") {
  // Every edge stays within the downstream cell diagonal, and the O-grid
  // layers grow smoothly instead of jumping to the outer box.
  for (double h : {0.05, 0.025, 0.017}) {
    CAPTURE(h);
    const auto m = build_channel_cylinder(h);
    CHECK(m.max_edge_length() <= 2.5 * h);
    double worst_ratio = 0.0;
    for (const auto& t : m.triangles()) {
      std::array<double, 3> len{};
      for (int j = 0; j < 3; ++j) {
        const auto& a = m.vertices()[t[j]];
        const auto& b = m.vertices()[t[(j + 1) % 3]];
        len[j] = std::hypot(a.x - b.x, a.y - b.y);
      }
      worst_ratio = std::max(worst_ratio, *std::max_element(len.begin(), len.end()) /
                                              *std::min_element(len.begin(), len.end()));
    }
    CHECK(worst_ratio <= 6.0);
  }
}

TEST_CASE("build_channel_cylinder") {
  const double h = 0.41 / 16.0;
  auto m = build_channel_cylinder(h);
  check_mesh_invariants(m);
  CHECK(m.markers() == std::set<int>{1, 2, 3, 4});
  std::size_t on_circle = 0;
  for (const auto& be : m.boundary_edges()) {
    const auto& a = m.vertices()[be.v0];
    const auto& b = m.vertices()[be.v1];
    if (be.marker == markers::cylinder) {
      for (const auto* p : {&a, &b}) CHECK(std::abs((p->x - 0.2) * (p->x - 0.2) + (p->y - 0.2) * (p->y - 0.2) - 0.0025) <= 1e-12);
      ++on_circle;
    } else if (be.marker == markers::inflow) {
      CHECK(a.x == 0.0);
      CHECK(b.x == 0.0);
    } else if (be.marker == markers::outflow) {
      CHECK(a.x == doctest::Approx(2.2));
      CHECK(b.x == doctest::Approx(2.2));
    } else {
      CHECK(((a.y == 0.0 && b.y == 0.0) || (a.y == 0.41 && b.y == 0.41)));
    }
  }
  CHECK(on_circle >= 16);
  // Area of the polygonal domain: exact rectangle minus the inscribed polygon.
  const double n = static_cast<double>(on_circle);
  const double polygon = 0.5 * n * 0.0025 * std::sin(2.0 * std::numbers::pi / n);
  CHECK(m.area() == doctest::Approx(2.2 * 0.41 - polygon).epsilon(1e-12));
  CHECK(std::abs(m.area() - (2.2 * 0.41 - std::numbers::pi * 0.0025)) <= 0.0025 * 4.0 / (n * n) * 10.0);

  CHECK_THROWS_AS(build_channel_cylinder(0.2), MeshError);
  CHECK_THROWS_AS(build_channel_cylinder(-1.0), MeshError);
}

TEST_CASE("channel mesh reaching the Taylor-Hood DOF budget of the benchmark exists") {
  // 2 (V + E) velocity + V pressure unknowns
  bool found = false;
  for (int m = 12; m <= 24 && !found; ++m) {
    auto mesh = build_channel_cylinder(0.41 / m);
    const auto dofs = 2 * (mesh.n_vertices() + mesh.edges().size()) + mesh.n_vertices();
    if (dofs >= 14000 && dofs <= 17000) found = true;
  }
  CHECK(found);
}

TEST_CASE("build_offset_annulus") {
  auto m = build_offset_annulus(0.08);
  check_mesh_invariants(m);
  CHECK(m.markers() == std::set<int>{markers::outer_circle, markers::inner_circle});
  const double exact = std::numbers::pi * (1.0 - 0.01);
  CHECK(std::abs(m.area() - exact) <= 0.02);
  for (const auto& p : m.vertices()) {
    CHECK(p.x * p.x + p.y * p.y <= 1.0 + 1e-12);
    CHECK((p.x - 0.5) * (p.x - 0.5) + p.y * p.y >= 0.01 - 1e-12);
  }
  std::size_t inner_edges = 0;
  for (const auto& be : m.boundary_edges()) {
    const auto& a = m.vertices()[be.v0];
    const auto& b = m.vertices()[be.v1];
    const double ra = std::hypot(a.x - 0.5, a.y), rb = std::hypot(b.x - 0.5, b.y);
    if (be.marker == markers::inner_circle) {
      ++inner_edges;
      CHECK(std::abs(ra - 0.1) <= 1e-12);
      CHECK(std::abs(rb - 0.1) <= 1e-12);
    } else {
      CHECK(std::abs(std::hypot(a.x, a.y) - 1.0) <= 1e-12);
    }
  }
  CHECK(inner_edges >= 16);
  // Area converges at second order in the boundary chord length.
  auto finer = build_offset_annulus(0.04);
  CHECK(std::abs(finer.area() - exact) < std::abs(m.area() - exact));
  CHECK_THROWS_AS(build_offset_annulus(0.5), MeshError);
}

TEST_CASE("mesh file round trip and errors") {
  auto m = build_unit_square(2);
  auto path = temp_path("roundtrip.mesh");
  write_mesh(m, path);
  CHECK(read_mesh(path) == m);

  auto annulus = build_offset_annulus(0.2);
  write_mesh(annulus, path);
  CHECK(read_mesh(path) == annulus);

  auto write = [&](const std::string& text) {
    std::ofstream(path) << text;
    return path;
  };
  // Clockwise triangle.
  try {
    (void)read_mesh(write("3 1 3\n0 0\n1 0\n0 1\n0 2 1\n0 1 1\n1 2 1\n2 0 1\n"));
    FAIL("expected orientation error");
  } catch (const MeshError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("triangle 0") != std::string::npos);
    CHECK(msg.find("line 5") != std::string::npos);
  }
  // Dangling vertex index.
  try {
    (void)read_mesh(write("# comment\n3 1 3\n0 0\n1 0\n0 1\n0 1 7\n0 1 1\n1 2 1\n2 0 1\n"));
    FAIL("expected index error");
  } catch (const MeshError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("vertex index 7") != std::string::npos);
    CHECK(msg.find("line 6") != std::string::npos);
  }
  CHECK_THROWS_AS(read_mesh(write("3 1 3\n0 0\n1 zero\n")), MeshError);
  CHECK_THROWS_AS(read_mesh(write("3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1 1\n")), MeshError);
  // Boundary edge that is actually missing a marker.
  CHECK_THROWS_AS(read_mesh(write("3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1 1\n1 2 1\n1 2 1\n")), MeshError);
  std::filesystem::remove(path);
}
