#include <doctest.h>

#include "savflow/diagnostics.hpp"
#include "savflow/experiments.hpp"

#include <cmath>
#include <numbers>

using namespace savflow;
using namespace savflow::diagnostics;
using savflow::mesh::Mesh;

namespace {

std::shared_ptr<const Mesh> channel() {
  static const auto m = std::make_shared<const Mesh>(mesh::build_channel_cylinder(0.04));
  return m;
}

/// Area enclosed by the edges carrying `marker`.
double enclosed_area(const Mesh& m, int marker) {
  double a = 0.0;
  for (const auto& e : m.boundary_edges()) {
    if (e.marker != marker) continue;
    const auto& p = m.vertices()[e.v0];
    const auto& q = m.vertices()[e.v1];
    a += 0.5 * (p.x * q.y - q.x * p.y);
  }
  return std::abs(a);
}

}  // namespace

TEST_CASE("drag and lift of simple pressure fields") {
  auto m = channel();
  auto vel = std::make_shared<const spaces::FeSpace>(m, 2);
  auto pre = std::make_shared<const spaces::FeSpace>(m, 1);
  const FeFunction u(vel, 2);
  const double area = enclosed_area(*m, mesh::markers::cylinder);
  CHECK(area == doctest::Approx(std::numbers::pi * 0.05 * 0.05).epsilon(0.01));

  auto constant = spaces::interpolate([](double, double) { return 1.0; }, pre);
  auto dl = drag_lift(u, constant, 1e-3);
  CHECK(std::abs(dl.drag) <= 1e-12);
  CHECK(std::abs(dl.lift) <= 1e-12);

  // The normal points into the fluid, so p = x gives -20 times the area.
  dl = drag_lift(u, spaces::interpolate([](double x, double) { return x; }, pre), 1e-3);
  CHECK(dl.drag == doctest::Approx(-20.0 * area).epsilon(1e-10));
  CHECK(std::abs(dl.lift) <= 1e-12);
  dl = drag_lift(u, spaces::interpolate([](double, double y) { return y; }, pre), 1e-3);
  CHECK(dl.lift == doctest::Approx(-20.0 * area).epsilon(1e-10));

  CHECK(pressure_drop(spaces::interpolate([](double x, double) { return x; }, pre)) == doctest::Approx(-0.1));
}

TEST_CASE("viscous drag of a quadratic shear") {
  // u = ((y - 0.2)^2, 0): on the circle du_t/dn = 2 r n_y^2, so the drag is
  // 20 nu * 2 r^2 * integral of sin^4 = 20 nu * 1.5 pi r^2 and the lift is 0.
  auto m = channel();
  auto vel = std::make_shared<const spaces::FeSpace>(m, 2);
  auto pre = std::make_shared<const spaces::FeSpace>(m, 1);
  const auto u = spaces::interpolate(
      [](double, double y) { return std::array<double, 2>{(y - 0.2) * (y - 0.2), 0.0}; }, vel);
  const double nu = 0.5, r = 0.05;
  const auto dl = drag_lift(u, FeFunction(pre, 1), nu);
  CHECK(dl.drag == doctest::Approx(20.0 * nu * 1.5 * std::numbers::pi * r * r).epsilon(0.02));
  CHECK(std::abs(dl.lift) <= 1e-3 * std::abs(dl.drag));
}

TEST_CASE("energy and enstrophy of the manufactured field") {
  auto m = std::make_shared<const Mesh>(mesh::build_unit_square(16));
  auto vel = std::make_shared<const spaces::FeSpace>(m, 2);
  const auto u = spaces::interpolate(
      [](double x, double y) { return experiments::manufactured::velocity(x, y, 0.0); }, vel);
  CHECK(energy(u) == doctest::Approx(0.5).epsilon(1e-4));
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(enstrophy(u, 0.1) == doctest::Approx(2.0 * pi2 * 0.1).epsilon(1e-3));
}

TEST_CASE("time norms and series summaries") {
  std::vector<DiagnosticsRecord> r(11);
  for (std::size_t k = 0; k < r.size(); ++k) {
    r[k].step = k;
    r[k].error_l2 = k == 0 ? 100.0 : 1.0;
    r[k].error_h1 = 2.0;
  }
  CHECK(error_norm(r, 0.1, ErrorMode::l2_in_time_of_l2) == doctest::Approx(1.0));
  CHECK(error_norm(r, 0.1, ErrorMode::l2_in_time_of_h1) == doctest::Approx(2.0));

  std::vector<DiagnosticsRecord> e(3);
  e[1].kinetic_energy = 1.0;
  e[2].kinetic_energy = 0.5;
  CHECK(energy_variation(e) == doctest::Approx(1.5));
}

TEST_CASE("stability ledger by hand") {
  std::vector<DiagnosticsRecord> r(3);
  r[1].u_sq = 1.0;
  r[1].extrap_sq = 2.0;
  r[1].curl_sq_alpha = 3.0;
  r[2].u_sq = 0.5;
  r[2].extrap_sq = 0.25;
  r[2].curl_sq_alpha = 1.0;
  r[2].grad_sq = 4.0;
  r[2].div_sq = 0.5;
  r[2].force_sq = 9.0;
  SavParameters p;
  p.nu = 0.5;
  p.dt = 0.1;
  p.alpha2 = 2.0;
  const auto s = stability_ledger(r, p, 0.2);
  CHECK(s.lhs == doctest::Approx(0.5 + 0.25 + 0.2 * 1.0 + 0.2 * (0.5 * 4.0 + 4.0 * 0.5)));
  CHECK(s.rhs == doctest::Approx(1.0 + 2.0 + 0.2 * 3.0 + 0.2 * 0.04 * 9.0 / 0.5));
  CHECK(s.holds());
  CHECK(poincare_bound(mesh::build_unit_square(2)) == doctest::Approx(1.0 / std::numbers::pi));
}
