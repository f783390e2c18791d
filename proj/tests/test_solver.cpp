#include <doctest.h>

#include "dense_oracle.hpp"
#include "fe_oracle.hpp"
#include "savflow/experiments.hpp"
#include "savflow/solver.hpp"

#include <cmath>
#include <random>

using namespace savflow;
using namespace savflow::solver;
using savflow::mesh::Mesh;

namespace {

std::shared_ptr<const Mesh> square(std::size_t n) { return std::make_shared<const Mesh>(mesh::build_unit_square(n)); }

const auto zero_bc = [](double, double, double) { return std::array<double, 2>{0.0, 0.0}; };

std::vector<spaces::DirichletBc> no_slip() { return {{{mesh::markers::dirichlet}, zero_bc}}; }

Force swirl() {
  return [](double x, double y, double t) {
    return std::array<double, 2>{std::sin(3.0 * y) * (1.0 + t), x * x - 0.3 * std::cos(2.0 * x * y)};
  };
}

SavParameters base_params(const Mesh& m, double nu, double dt, double t_end) {
  SavParameters p;
  p.nu = nu;
  p.dt = dt;
  p.t_end = t_end;
  p.alpha1 = alpha1_uniform_h2(m);
  p.alpha2 = 0.5;
  return p;
}

/// Swirling start that vanishes on the boundary of the unit square.
spaces::VectorField bubble_flow() {
  return [](double x, double y) {
    const double b = x * (1.0 - x) * y * (1.0 - y);
    return std::array<double, 2>{8.0 * b * (1.0 - 2.0 * y), -8.0 * b * (1.0 - 2.0 * x)};
  };
}

}  // namespace

TEST_CASE("zero data stays exactly at rest") {
  auto m = square(4);
  auto setup = make_setup(m, no_slip(), {}, {}, true);
  SavSolver s(setup, base_params(*m, 0.1, 0.05, 0.25));
  const auto records = run(s);
  REQUIRE(records.size() == 6);
  for (const auto& r : records) {
    CHECK(r.kinetic_energy == 0.0);
    CHECK(r.div_discrete == 0.0);
  }
}

TEST_CASE("steady polynomial solution is reproduced with and without convection") {
  // u = (y^2, x^2) is divergence free and lies in P2, p = x - y has zero mean
  // and lies in P1, curl u = 2x - 2y lies in the projection space.
  const double nu = 0.3;
  for (bool convection : {false, true}) {
    CAPTURE(convection);
    auto exact = [](double x, double y, double) { return std::array<double, 2>{y * y, x * x}; };
    Force f = [=](double x, double y, double) {
      std::array<double, 2> v{-2.0 * nu + 1.0, -2.0 * nu - 1.0};
      if (convection) {
        v[0] += 2.0 * x * x * y;
        v[1] += 2.0 * x * y * y;
      }
      return v;
    };
    auto m = square(3);
    auto setup = make_setup(m, {{{mesh::markers::dirichlet}, exact}}, f,
                            [&](double x, double y) { return exact(x, y, 0.0); }, false);
    auto p = base_params(*m, nu, 0.1, 0.3);
    p.convection = convection;
    SavSolver s(setup, p);
    auto state = s.initialize();
    const auto u0 = state.u_curr.coeffs;
    for (int k = 0; k < 3; ++k) state = s.step(state);
    double du = 0.0;
    for (std::size_t i = 0; i < u0.size(); ++i) du = std::max(du, std::abs(state.u_curr.coeffs[i] - u0[i]));
    CHECK(du <= 1e-10);
    const auto& pc = state.p_curr.coeffs;
    double dp = 0.0;
    for (std::size_t v = 0; v < m->n_vertices(); ++v)
      dp = std::max(dp, std::abs(pc[v] - (m->vertices()[v].x - m->vertices()[v].y)));
    CHECK(dp <= 1e-9);
  }
}

TEST_CASE("one step agrees with a dense reference built from independent assembly") {
  auto m = square(4);
  const double nu = 0.7, dt = 0.05, a1 = 0.02, a2 = 0.4;
  // Quadratic history so that the extrapolated field is a global polynomial.
  auto un = [](double x, double y) { return std::array<double, 2>{0.5 + x * y - y * y, x - 0.3 * x * x + y}; };
  auto um = [](double x, double y) { return std::array<double, 2>{0.4 + 0.9 * x * y, 0.2 * x - y * y}; };
  auto beta = [&](double x, double y) {
    const auto a = un(x, y), b = um(x, y);
    return std::array<double, 2>{2.0 * a[0] - b[0], 2.0 * a[1] - b[1]};
  };
  auto force = [](double x, double y) { return std::array<double, 2>{x * y + 1.0, x - y * y}; };

  auto setup = make_setup(m, no_slip(), [&](double x, double y, double) { return force(x, y); }, {}, true);
  SavParameters p;
  p.nu = nu;
  p.dt = dt;
  p.t_end = dt;
  p.alpha1 = alpha1_constant(*m, a1);
  p.alpha2 = a2;
  SavSolver s(setup, p);
  SavState st = s.initialize();
  st.u_curr = spaces::interpolate(un, setup.velocity);
  st.u_prev = spaces::interpolate(um, setup.velocity);
  const auto next = s.step(st);

  // Reference operators.
  using test::OracleBasis;
  auto grad = [](const OracleBasis& b, int k, double x, double y) { return b.grad(k, x, y); };
  auto div = [&](const OracleBasis& b, int k, int c, double x, double y) { return grad(b, k, x, y)[c]; };
  auto curl = [&](const OracleBasis& b, int k, int c, double x, double y) {
    const auto g = grad(b, k, x, y);
    return c == 1 ? g[0] : -g[1];
  };
  const auto mass = test::oracle_assemble(*m, 2, 2, 2, 2, [](const OracleBasis& a, int k, int ci, const OracleBasis& b,
                                                            int l, int cj, double x, double y) {
    return ci == cj ? a.value(k, x, y) * b.value(l, x, y) : 0.0;
  });
  const auto system = test::oracle_assemble(*m, 2, 2, 2, 2, [&](const OracleBasis& a, int k, int ci,
                                                               const OracleBasis& b, int l, int cj, double x,
                                                               double y) {
    double v = a1 * curl(a, k, ci, x, y) * curl(b, l, cj, x, y) + a2 * div(a, k, ci, x, y) * div(b, l, cj, x, y);
    if (ci == cj) {
      const auto ga = grad(a, k, x, y), gb = grad(b, l, x, y);
      const auto w = beta(x, y);
      const double pa = a.value(k, x, y), pb = b.value(l, x, y);
      v += 1.5 / dt * pa * pb + nu * (ga[0] * gb[0] + ga[1] * gb[1]);
      v += 0.5 * ((w[0] * gb[0] + w[1] * gb[1]) * pa - (w[0] * ga[0] + w[1] * ga[1]) * pb);
    }
    return v;
  });
  const auto bmat = test::oracle_assemble(*m, 1, 1, 2, 2, [&](const OracleBasis& a, int k, int, const OracleBasis& b,
                                                              int l, int cj, double x, double y) {
    return a.value(k, x, y) * div(b, l, cj, x, y);
  });
  const auto cmat = test::oracle_assemble(*m, 1, 1, 2, 2, [&](const OracleBasis& a, int k, int, const OracleBasis& b,
                                                              int l, int cj, double x, double y) {
    return a.value(k, x, y) * curl(b, l, cj, x, y);
  });
  const auto mp = test::oracle_assemble(*m, 1, 1, 1, 1, [](const OracleBasis& a, int k, int, const OracleBasis& b,
                                                           int l, int, double x, double y) {
    return a.value(k, x, y) * b.value(l, x, y);
  });
  const auto load = test::oracle_assemble(*m, 2, 2, 1, 1, [&](const OracleBasis& a, int k, int ci,
                                                             const OracleBasis& b, int l, int, double x, double y) {
    return force(x, y)[ci] * a.value(k, x, y) * b.value(l, x, y);
  });

  const std::size_t nv = mass.rows, np = mp.rows, n = nv + np + 1;
  const std::vector<double> ones(np, 1.0);
  const auto fvec = test::dense_multiply(load, ones);
  const auto mvec = test::dense_multiply(mp, ones);
  std::vector<double> hist(nv);
  for (std::size_t i = 0; i < nv; ++i) hist[i] = (4.0 * st.u_curr.coeffs[i] - st.u_prev.coeffs[i]) / (2.0 * dt);
  const auto mh = test::dense_multiply(mass, hist);
  const auto sproj = test::dense_solve(mp, test::dense_multiply(cmat, st.u_curr.coeffs));

  test::Dense big(n, n);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t i = 0; i < nv; ++i) {
    for (std::size_t j = 0; j < nv; ++j) big(i, j) = system(i, j);
    for (std::size_t j = 0; j < np; ++j) {
      big(i, nv + j) = -bmat(j, i);
      big(nv + j, i) = bmat(j, i);
    }
    rhs[i] = mh[i] + fvec[i];
    for (std::size_t j = 0; j < np; ++j) rhs[i] += a1 * cmat(j, i) * sproj[j];
  }
  for (std::size_t j = 0; j < np; ++j) big(nv + j, n - 1) = big(n - 1, nv + j) = mvec[j];

  // Homogeneous Dirichlet rows on boundary nodes.
  const auto dofs = test::oracle_dofs(*m, 2);
  for (std::size_t t = 0; t < m->n_triangles(); ++t)
    for (std::size_t k = 0; k < dofs.dofs[t].size(); ++k) {
      const auto q = dofs.nodes[t][k];
      if (q.x != 0.0 && q.x != 1.0 && q.y != 0.0 && q.y != 1.0) continue;
      for (std::size_t c = 0; c < 2; ++c) {
        const std::size_t row = c * dofs.n + dofs.dofs[t][k];
        for (std::size_t j = 0; j < n; ++j) big(row, j) = 0.0;
        big(row, row) = 1.0;
        rhs[row] = 0.0;
      }
    }
  const auto x = test::dense_solve(big, rhs);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < nv; ++i) {
    err = std::max(err, std::abs(x[i] - next.u_curr.coeffs[i]));
    scale = std::max(scale, std::abs(x[i]));
  }
  for (std::size_t j = 0; j < np; ++j) err = std::max(err, std::abs(x[nv + j] - next.p_curr.coeffs[j]));
  CHECK(scale > 0.01);
  CHECK(err <= 1e-10);
  double serr = 0.0;
  for (std::size_t j = 0; j < np; ++j) serr = std::max(serr, std::abs(sproj[j] - next.s_curr.coeffs[j]));
  CHECK(serr <= 1e-10);
}

TEST_CASE("discrete divergence vanishes and runs are deterministic") {
  auto m = square(4);
  auto setup = make_setup(m, no_slip(), swirl(), bubble_flow(), true);
  const auto p = base_params(*m, 0.01, 0.02, 0.2);
  std::vector<double> seen;
  SavSolver a(setup, p), b(setup, p);
  const auto ra = run(a, {}, {[&](const SavState& st, const DiagnosticsRecord&) { seen.push_back(st.time); }});
  const auto rb = run(b);
  REQUIRE(ra.size() == 11);
  CHECK(seen.size() == 11);
  for (std::size_t k = 0; k < ra.size(); ++k) {
    CHECK(ra[k].kinetic_energy == rb[k].kinetic_energy);
    if (k == 0) continue;
    CHECK(ra[k].div_discrete <= 1e-9);
    CHECK(ra[k].linear_residual <= 1e-10);
  }

  // A run of one step equals a direct step.
  auto p1 = p;
  p1.t_end = p.dt;
  SavSolver c(setup, p1), d(setup, p1);
  std::vector<double> last;
  run(c, {}, {[&](const SavState& st, const DiagnosticsRecord&) { last = st.u_curr.coeffs; }});
  const auto st = d.step(d.initialize());
  CHECK(last == st.u_curr.coeffs);
}

TEST_CASE("switching the subgrid terms off matches zero subgrid viscosity") {
  auto m = square(4);
  auto setup = make_setup(m, no_slip(), swirl(), bubble_flow(), true);
  auto with = base_params(*m, 0.02, 0.05, 0.2);
  auto off = nosav_mode(with);
  auto zero = with;
  zero.alpha1 = alpha1_constant(*m, 0.0);
  SavSolver so(setup, off), sz(setup, zero), sw(setup, with);
  const auto ro = run(so), rz = run(sz), rw = run(sw);
  for (std::size_t k = 0; k < ro.size(); ++k) CHECK(std::abs(ro[k].kinetic_energy - rz[k].kinetic_energy) <= 1e-14);
  CHECK(std::abs(rw.back().kinetic_energy - ro.back().kinetic_energy) > 1e-10);
  CHECK(std::isnan(ro.back().sav_bound_slack));
}

TEST_CASE("energy identity closes every step and detects a perturbed solution") {
  auto m = square(4);
  auto setup = make_setup(m, no_slip(), swirl(), bubble_flow(), true);
  auto p = base_params(*m, 0.005, 0.05, 0.5);
  p.alpha1 = alpha1_constant(*m, 0.05);
  SavSolver s(setup, p);
  std::vector<SavState> states;
  const auto records = run(s, {}, {[&](const SavState& st, const DiagnosticsRecord&) { states.push_back(st); }});
  for (std::size_t k = 1; k < records.size(); ++k) {
    CAPTURE(k);
    CHECK(records[k].energy_identity_relative <= 1e-9);
    CHECK(records[k].sav_bound_slack >= -1e-12);
  }

  // Negative control: a slightly wrong u^{n+1} breaks the identity.
  auto a = states[3].u_curr;
  for (auto& v : a.coeffs) v *= 1.0 + 1e-6;
  const auto led = diagnostics::energy_ledger(a, states[2].u_curr, states[2].u_prev, &states[3].s_curr, p,
                                              setup.force, states[3].time);
  CHECK(diagnostics::energy_identity_check(led) > 1e-8);

  const auto ledger = diagnostics::stability_ledger(records, p, diagnostics::poincare_bound(*m));
  CHECK(ledger.holds());
  CHECK(ledger.lhs > 0.0);
}

TEST_CASE("stability ledger holds without forcing at high Reynolds number") {
  auto m = square(6);
  auto setup = make_setup(m, no_slip(), {}, bubble_flow(), true);
  for (bool sav : {true, false}) {
    auto p = base_params(*m, 1e-5, 0.1, 2.0);
    if (!sav) p = nosav_mode(p);
    SavSolver s(setup, p);
    const auto records = run(s);
    const auto ledger = diagnostics::stability_ledger(records, p, diagnostics::poincare_bound(*m));
    CAPTURE(sav);
    CHECK(ledger.holds());
    for (std::size_t k = 1; k < records.size(); ++k) CHECK(records[k].energy_identity_relative <= 1e-9);
  }
}

TEST_CASE("invalid parameters are rejected") {
  auto m = square(2);
  auto setup = make_setup(m, no_slip(), {}, {}, true);
  auto p = base_params(*m, 1.0, 0.1, 1.0);
  p.dt = -1.0;
  CHECK_THROWS_AS(SavSolver(setup, p), ParameterError);
  p = base_params(*m, 1.0, 0.1, 1.0);
  p.alpha1.pop_back();
  CHECK_THROWS_AS(SavSolver(setup, p), ParameterError);
  auto bad = make_setup(m, {{{7}, zero_bc}}, {}, {}, true);
  SavSolver s(bad, base_params(*m, 1.0, 0.1, 1.0));
  CHECK_THROWS(s.step(s.initialize()));
}

TEST_CASE("manufactured forcing satisfies the momentum equation") {
  CHECK(experiments::manufactured::max_strong_residual(1.0, 20, 11) <= 1e-10);
  CHECK(experiments::manufactured::max_strong_residual(0.01, 20, 12) <= 1e-10);
  const auto g = experiments::manufactured::velocity_gradient(0.3, 0.2, 0.0);
  CHECK(g[0][0] + g[1][1] == 0.0);
}

TEST_CASE("second order in time on a solution exact in space") {
  // u = g(t) (y^2, x^2), p = g(t) (x - y), g = 1 + t^2. The velocity lies in
  // P2 and the pressure in P1, so only the time discretization errs, and
  // u_t(0) = 0 keeps the u^{-1} = u^0 start from polluting the rate.
  const double nu = 0.05;
  auto g = [](double t) { return 1.0 + t * t; };
  auto exact = [=](double x, double y, double t) { return std::array<double, 2>{g(t) * y * y, g(t) * x * x}; };
  Force f = [=](double x, double y, double t) {
    const double gt = g(t), dg = 2.0 * t;
    return std::array<double, 2>{dg * y * y - 2.0 * nu * gt + gt * gt * 2.0 * x * x * y + gt,
                                 dg * x * x - 2.0 * nu * gt + gt * gt * 2.0 * x * y * y - gt};
  };
  auto m = square(2);
  for (bool sav : {false, true}) {
    CAPTURE(sav);
    std::vector<double> errors;
    for (double dt : {0.1, 0.05, 0.025}) {
      auto setup = make_setup(m, {{{mesh::markers::dirichlet}, exact}}, f,
                              [&](double x, double y) { return exact(x, y, 0.0); }, false);
      auto p = base_params(*m, nu, dt, 1.0);
      p.alpha1 = alpha1_constant(*m, 1e-4);
      if (!sav) p = nosav_mode(p);
      SavSolver s(setup, p);
      RunOptions opt;
      opt.exact = [&](double t) {
        return spaces::ExactVector{[=](double x, double y) { return exact(x, y, t); },
                                   [=](double x, double y) {
                                     return std::array<std::array<double, 2>, 2>{
                                         {{0.0, 2.0 * g(t) * y}, {2.0 * g(t) * x, 0.0}}};
                                   }};
      };
      const auto records = run(s, opt);
      errors.push_back(records.back().error_l2);
    }
    MESSAGE("final L2 errors ", errors[0], " ", errors[1], " ", errors[2]);
    CHECK(std::log2(errors[1] / errors[2]) >= 1.8);
    CHECK(std::log2(errors[0] / errors[1]) >= 1.7);
  }
}
