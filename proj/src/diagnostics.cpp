#include "savflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace savflow::diagnostics {

using spaces::default_rule;
using spaces::element_geometry;
using spaces::sample;

double EnergyLedger::largest() const {
  return std::max({std::abs(d_norm), std::abs(d_extrap), std::abs(d_second), std::abs(viscous), std::abs(subgrid),
                   std::abs(graddiv), std::abs(forcing)});
}

double energy(const FeFunction& u) {
  const double n = spaces::norms(u).l2;
  return 0.5 * n * n;
}

double enstrophy(const FeFunction& u, double nu) {
  const double c = spaces::norms(u).curl_l2;
  return 0.5 * nu * c * c;
}

EnergyLedger energy_ledger(const FeFunction& a, const FeFunction& b, const FeFunction& c, const FeFunction* s_next,
                           const SavParameters& params, const Force& f, double t_next) {
  const auto& m = a.space->mesh();
  const auto& rule = default_rule();
  const bool subgrid = params.sav_enabled && !params.alpha1.empty();
  double a2 = 0, b2 = 0, ea2 = 0, eb2 = 0, second = 0, grad = 0, sub = 0, div = 0, force = 0;
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    const auto g = element_geometry(m, t);
    const double alpha = subgrid ? params.alpha1[t] : 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const double w = rule.weights[q] * g.det;
      const auto va = sample(a, t, l), vb = sample(b, t, l), vc = sample(c, t, l);
      for (int k = 0; k < 2; ++k) {
        a2 += w * va.value[k] * va.value[k];
        b2 += w * vb.value[k] * vb.value[k];
        const double ea = 2.0 * va.value[k] - vb.value[k];
        const double eb = 2.0 * vb.value[k] - vc.value[k];
        ea2 += w * ea * ea;
        eb2 += w * eb * eb;
        const double d2 = va.value[k] - 2.0 * vb.value[k] + vc.value[k];
        second += w * d2 * d2;
        grad += w * (va.grad[k][0] * va.grad[k][0] + va.grad[k][1] * va.grad[k][1]);
      }
      div += w * va.div() * va.div();
      if (subgrid) {
        const double s = sample(*s_next, t, l).value[0];
        sub += w * alpha * (va.curl() - s) * va.curl();
      }
      if (f) {
        const auto p = g.map(l);
        const auto fv = f(p.x, p.y, t_next);
        force += w * (fv[0] * va.value[0] + fv[1] * va.value[1]);
      }
    }
  }
  const double dt = params.dt;
  EnergyLedger e;
  e.d_norm = (a2 - b2) / (4.0 * dt);
  e.d_extrap = (ea2 - eb2) / (4.0 * dt);
  e.d_second = second / (4.0 * dt);
  e.viscous = params.nu * grad;
  e.subgrid = sub;
  e.graddiv = params.alpha2 * div;
  e.forcing = force;
  return e;
}

double energy_identity_check(const EnergyLedger& ledger) {
  const double scale = ledger.largest();
  if (scale == 0.0) return 0.0;
  return std::abs(ledger.residual()) / scale;
}

double sav_bound_check(const FeFunction& s_next, const FeFunction& u_curr) {
  return spaces::norms(u_curr).curl_l2 - spaces::norms(s_next).l2;
}

double poincare_bound(const mesh::Mesh& m) {
  double xmin = m.vertices()[0].x, xmax = xmin, ymin = m.vertices()[0].y, ymax = ymin;
  for (const auto& p : m.vertices()) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return std::min(xmax - xmin, ymax - ymin) / std::numbers::pi;
}

StabilityLedger stability_ledger(std::span<const DiagnosticsRecord> records, const SavParameters& params, double c_pf) {
  StabilityLedger s;
  if (records.size() < 2) return s;
  const std::size_t n_last = records.size() - 1;
  const double dt = params.dt;
  const auto& first = records[1];
  const auto& last = records[n_last];
  const double sav = params.sav_enabled ? 1.0 : 0.0;
  s.lhs = last.u_sq + last.extrap_sq + 2.0 * sav * dt * last.curl_sq_alpha;
  s.rhs = first.u_sq + first.extrap_sq + 2.0 * sav * dt * first.curl_sq_alpha;
  for (std::size_t n = 2; n <= n_last; ++n) {
    s.lhs += 2.0 * dt * (params.nu * records[n].grad_sq + 2.0 * params.alpha2 * records[n].div_sq);
    s.rhs += 2.0 * dt * c_pf * c_pf * records[n].force_sq / params.nu;
  }
  return s;
}

DragLift drag_lift(const FeFunction& u, const FeFunction& p, double nu, int marker) {
  const auto& m = u.space->mesh();
  constexpr double prefactor = 20.0;
  // Three-point Gauss-Legendre rule on [0, 1].
  const double r = std::sqrt(0.6);
  const std::array<double, 3> s{0.5 * (1.0 - r), 0.5, 0.5 * (1.0 + r)};
  const std::array<double, 3> w{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  DragLift out;
  bool any = false;
  for (std::size_t k = 0; k < m.boundary_edges().size(); ++k) {
    if (m.boundary_edges()[k].marker != marker) continue;
    any = true;
    const auto [t, slot] = m.boundary_edge_owner()[k];
    const auto& tri = m.triangles()[t];
    const int j0 = slot, j1 = (slot + 1) % 3;
    const auto& a = m.vertices()[tri[static_cast<std::size_t>(j0)]];
    const auto& b = m.vertices()[tri[static_cast<std::size_t>(j1)]];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    // The fluid triangle is counter-clockwise, so (dy, -dx) points out of
    // the fluid; the obstacle normal is its negative.
    const double nx = -(b.y - a.y) / len, ny = (b.x - a.x) / len;
    const double tx = ny, ty = -nx;
    for (int q = 0; q < 3; ++q) {
      std::array<double, 3> l{0.0, 0.0, 0.0};
      l[static_cast<std::size_t>(j0)] = 1.0 - s[q];
      l[static_cast<std::size_t>(j1)] = s[q];
      const auto us = sample(u, t, l);
      const double pv = sample(p, t, l).value[0];
      // d(u.t)/dn = t_i (d_j u_i) n_j
      const double dut_dn = tx * (us.grad[0][0] * nx + us.grad[0][1] * ny) + ty * (us.grad[1][0] * nx + us.grad[1][1] * ny);
      const double jw = w[q] * len;
      out.drag += jw * (nu * dut_dn * ny - pv * nx);
      out.lift -= jw * (nu * dut_dn * nx + pv * ny);
    }
  }
  if (!any) throw spaces::SpaceError("drag_lift: no boundary edges with marker " + std::to_string(marker));
  out.drag *= prefactor;
  out.lift *= prefactor;
  return out;
}

double pressure_drop(const FeFunction& p) {
  return spaces::point_eval(p, 0.15, 0.2) - spaces::point_eval(p, 0.25, 0.2);
}

double error_norm(std::span<const DiagnosticsRecord> records, double dt, ErrorMode mode) {
  double s = 0.0;
  for (const auto& r : records) {
    if (r.step == 0) continue;
    const double e = mode == ErrorMode::l2_in_time_of_l2 ? r.error_l2 : r.error_h1;
    s += e * e;
  }
  return std::sqrt(dt * s);
}

double energy_variation(std::span<const DiagnosticsRecord> records) {
  double v = 0.0;
  for (std::size_t k = 1; k < records.size(); ++k) v += std::abs(records[k].kinetic_energy - records[k - 1].kinetic_energy);
  return v;
}

}  // namespace savflow::diagnostics
