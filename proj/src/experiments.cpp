#include "savflow/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace savflow::experiments {

using diagnostics::DiagnosticsRecord;
using solver::RunOptions;
using solver::SavSolver;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

/// a + b e1 + c e2 + d e1 e2 with e1^2 = e2^2 = 0.
struct HyperDual {
  double a = 0, b = 0, c = 0, d = 0;
};

HyperDual operator*(HyperDual x, HyperDual y) {
  return {x.a * y.a, x.a * y.b + x.b * y.a, x.a * y.c + x.c * y.a, x.a * y.d + x.b * y.c + x.c * y.b + x.d * y.a};
}
HyperDual operator*(double s, HyperDual x) { return {s * x.a, s * x.b, s * x.c, s * x.d}; }
HyperDual operator+(double s, HyperDual x) { return {s + x.a, x.b, x.c, x.d}; }
HyperDual sin(HyperDual x) {
  const double s = std::sin(x.a), c = std::cos(x.a);
  return {s, c * x.b, c * x.c, c * x.d - s * x.b * x.c};
}
HyperDual cos(HyperDual x) {
  const double s = std::sin(x.a), c = std::cos(x.a);
  return {c, -s * x.b, -s * x.c, -s * x.d - c * x.b * x.c};
}

template <class T>
std::array<T, 2> truesol(T x, T y, T t) {
  using std::cos;
  using std::sin;
  const T g = 1.0 + 0.01 * t;
  return {g * sin(two_pi * y), g * cos(two_pi * x)};
}

/// Subgrid coefficient per element; `h` is the mesh size used by the h2 mode.
std::vector<double> alpha1_for(const ExperimentConfig& c, const mesh::Mesh& m, double h) {
  const auto mode = c.text("alpha1");
  if (mode == "h2") return alpha1_constant(m, h * h);
  if (mode == "local_h2") return alpha1_per_element_h2(m);
  return alpha1_constant(m, c.number("alpha1"));
}

double min_finite(std::span<const DiagnosticsRecord> records, double DiagnosticsRecord::*field) {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& r : records)
    if (!std::isnan(r.*field)) v = std::min(v, r.*field);
  return std::isinf(v) ? diagnostics::not_available : v;
}

double max_finite(std::span<const DiagnosticsRecord> records, double DiagnosticsRecord::*field) {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& r : records)
    if (!std::isnan(r.*field)) v = std::max(v, r.*field);
  return std::isinf(v) ? diagnostics::not_available : v;
}

const auto zero_bc = [](double, double, double) { return std::array<double, 2>{0.0, 0.0}; };

}  // namespace

namespace manufactured {

std::array<double, 2> velocity(double x, double y, double t) { return truesol(x, y, t); }

std::array<std::array<double, 2>, 2> velocity_gradient(double x, double y, double t) {
  const double g = 1.0 + 0.01 * t;
  return {{{0.0, g * two_pi * std::cos(two_pi * y)}, {-g * two_pi * std::sin(two_pi * x), 0.0}}};
}

double pressure(double x, double y) { return x + y; }

std::array<double, 2> force(double x, double y, double t, double nu) {
  const double g = 1.0 + 0.01 * t;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double sy = std::sin(two_pi * y), cy = std::cos(two_pi * y);
  const double sx = std::sin(two_pi * x), cx = std::cos(two_pi * x);
  return {0.01 * sy + 4.0 * pi2 * nu * g * sy + g * g * two_pi * cx * cy + 1.0,
          0.01 * cx + 4.0 * pi2 * nu * g * cx - g * g * two_pi * sy * sx + 1.0};
}

double max_strong_residual(double nu, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double x = u(rng), y = u(rng), t = 0.01 * u(rng);
    // Second derivatives in x and y, first derivatives from the same sweeps.
    const auto ux = truesol(HyperDual{x, 1, 1, 0}, HyperDual{y}, HyperDual{t});
    const auto uy = truesol(HyperDual{x}, HyperDual{y, 1, 1, 0}, HyperDual{t});
    const auto ut = truesol(HyperDual{x}, HyperDual{y}, HyperDual{t, 1, 0, 0});
    const auto v = truesol(x, y, t);
    // p = x + y has unit gradient.
    const auto f = force(x, y, t, nu);
    for (int i = 0; i < 2; ++i) {
      const double r = ut[i].b - nu * (ux[i].d + uy[i].d) + v[0] * ux[i].b + v[1] * uy[i].b + 1.0 - f[i];
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

}  // namespace manufactured

std::array<double, 2> rotating_force(double x, double y) {
  const double r = 1.0 - x * x - y * y;
  return {-4.0 * y * r, 4.0 * x * r};
}

double channel_profile(double y, double t) {
  return 6.0 / (0.41 * 0.41) * std::sin(std::numbers::pi * t / 8.0) * y * (0.41 - y);
}

std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& config) {
  const double nu = config.number("nu");
  if (manufactured::max_strong_residual(nu, 20, 2024) > 1e-10)
    throw std::logic_error("manufactured forcing does not match the exact solution");
  const auto levels = config.numbers("levels");
  const double dt0 = config.number("dt");
  std::vector<ConvergenceRow> rows;
  for (double lv : levels) {
    const auto n = static_cast<std::size_t>(lv);
    auto m = std::make_shared<const mesh::Mesh>(mesh::build_unit_square(n));
    const double h = 1.0 / static_cast<double>(n);
    SavParameters p;
    p.nu = nu;
    p.dt = dt0 * levels.front() / lv;
    p.t_end = config.number("t_end");
    p.alpha1 = alpha1_for(config, *m, h);
    p.alpha2 = config.number("alpha2");
    p.sav_enabled = config.flag("sav");
    std::vector<spaces::DirichletBc> bcs{{{mesh::markers::dirichlet}, manufactured::velocity}};
    auto setup = solver::make_setup(
        m, bcs, [nu](double x, double y, double t) { return manufactured::force(x, y, t, nu); },
        [](double x, double y) { return manufactured::velocity(x, y, 0.0); }, false);
    SavSolver s(setup, p);
    RunOptions opt;
    opt.exact = [](double t) {
      return spaces::ExactVector{[t](double x, double y) { return manufactured::velocity(x, y, t); },
                                 [t](double x, double y) { return manufactured::velocity_gradient(x, y, t); }};
    };
    const auto records = solver::run(s, opt);
    ConvergenceRow row;
    row.h = h;
    row.dt = p.dt;
    row.steps = p.n_steps();
    row.dofs = 2 * setup.velocity->n_dofs() + setup.pressure->n_dofs();
    row.error_l2 = diagnostics::error_norm(records, p.dt, diagnostics::ErrorMode::l2_in_time_of_l2);
    row.error_h1 = diagnostics::error_norm(records, p.dt, diagnostics::ErrorMode::l2_in_time_of_h1);
    const auto ledger = diagnostics::stability_ledger(records, p, diagnostics::poincare_bound(*m));
    row.stability_lhs = ledger.lhs;
    row.stability_rhs = ledger.rhs;
    row.min_sav_slack = min_finite(records, &DiagnosticsRecord::sav_bound_slack);
    row.max_divergence = max_finite(records, &DiagnosticsRecord::div_discrete);
    if (!rows.empty()) {
      const auto& prev = rows.back();
      const double ratio = std::log(prev.h / h);
      row.rate_l2 = std::log(prev.error_l2 / row.error_l2) / ratio;
      row.rate_h1 = std::log(prev.error_h1 / row.error_h1) / ratio;
    }
    rows.push_back(row);
  }
  return rows;
}

CylinderSummary run_cylinder(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  auto m = std::make_shared<const mesh::Mesh>(mesh::build_channel_cylinder(config.number("mesh_h")));
  SavParameters p;
  p.nu = config.number("nu");
  p.dt = config.number("dt");
  p.t_end = config.number("t_end");
  p.alpha1 = alpha1_for(config, *m, m->max_edge_length());
  p.alpha2 = config.number("alpha2");
  p.sav_enabled = config.flag("sav");
  const auto profile = [](double, double y, double t) { return std::array<double, 2>{channel_profile(y, t), 0.0}; };
  std::vector<spaces::DirichletBc> bcs{
      {{mesh::markers::walls, mesh::markers::cylinder}, zero_bc},
      {{mesh::markers::inflow, mesh::markers::outflow}, profile},
  };
  auto setup = solver::make_setup(m, bcs, {}, {}, false);
  SavSolver s(setup, p);
  RunOptions opt;
  opt.cylinder_quantities = true;
  CylinderSummary out;
  out.records = solver::run(s, opt);
  out.dofs = 2 * setup.velocity->n_dofs() + setup.pressure->n_dofs();
  out.n_vertices = m->n_vertices();
  out.n_triangles = m->n_triangles();
  out.drag_max = -std::numeric_limits<double>::infinity();
  out.lift_max = -std::numeric_limits<double>::infinity();
  for (const auto& r : out.records) {
    if (r.drag > out.drag_max) {
      out.drag_max = r.drag;
      out.drag_max_time = r.time;
    }
    if (r.lift > out.lift_max) {
      out.lift_max = r.lift;
      out.lift_max_time = r.time;
    }
  }
  out.min_sav_slack = min_finite(out.records, &DiagnosticsRecord::sav_bound_slack);
  out.max_divergence = max_finite(out.records, &DiagnosticsRecord::div_discrete);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<OffsetRun> run_offset_circles(const ExperimentConfig& config) {
  auto m = std::make_shared<const mesh::Mesh>(mesh::build_offset_annulus(config.number("mesh_h")));
  std::vector<spaces::DirichletBc> bcs{{{mesh::markers::outer_circle, mesh::markers::inner_circle}, zero_bc}};
  auto setup = solver::make_setup(m, bcs, [](double x, double y, double) { return rotating_force(x, y); }, {}, true);
  std::vector<OffsetRun> out;
  std::vector<bool> variants{config.flag("sav")};
  if (config.flag("compare_nosav") && config.flag("sav")) variants.push_back(false);
  for (double re : config.numbers("reynolds"))
    for (bool sav : variants) {
      SavParameters p;
      p.nu = 1.0 / re;
      p.dt = config.number("dt");
      p.t_end = config.number("t_end");
      p.alpha1 = alpha1_for(config, *m, m->max_edge_length());
      p.alpha2 = config.number("alpha2");
      if (!sav) p = nosav_mode(p);
      OffsetRun run;
      run.reynolds = re;
      run.sav = sav;
      SavSolver s(setup, p);
      try {
        run.records = solver::run(s);
        run.completed = true;
      } catch (const solver::DivergenceError& e) {
        run.diverged_step = e.step();
      }
      run.energy_variation = diagnostics::energy_variation(run.records);
      run.max_identity_relative = max_finite(run.records, &DiagnosticsRecord::energy_identity_relative);
      run.min_sav_slack = min_finite(run.records, &DiagnosticsRecord::sav_bound_slack);
      const auto ledger = diagnostics::stability_ledger(run.records, p, diagnostics::poincare_bound(*m));
      run.stability_lhs = ledger.lhs;
      run.stability_rhs = ledger.rhs;
      out.push_back(std::move(run));
    }
  return out;
}

namespace {

std::string csv_row(std::initializer_list<double> values) {
  std::string s;
  for (double v : values) s += (s.empty() ? "" : ",") + format_number(v);
  return s + "\n";
}

std::string fixed(double v, const char* fmt = "%.6e") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

std::string run_and_write(const ExperimentConfig& config) {
  const std::filesystem::path dir = config.text("output_dir");
  std::ostringstream summary;
  if (config.experiment == "convergence") {
    const auto rows = run_convergence(config);
    std::string csv = "h,dt,steps,dofs,error_l2,rate_l2,error_h1,rate_h1,stability_lhs,stability_rhs,min_sav_slack,max_div\n";
    summary << "h        dt          L2(L2) error   rate   L2(H1) error   rate\n";
    for (const auto& r : rows) {
      csv += csv_row({r.h, r.dt, static_cast<double>(r.steps), static_cast<double>(r.dofs), r.error_l2, r.rate_l2,
                      r.error_h1, r.rate_h1, r.stability_lhs, r.stability_rhs, r.min_sav_slack, r.max_divergence});
      summary << "1/" << static_cast<int>(std::lround(1.0 / r.h)) << "\t " << fixed(r.dt, "%-10g") << "  "
              << fixed(r.error_l2) << "   " << (std::isnan(r.rate_l2) ? "  -  " : fixed(r.rate_l2, "%.2f")) << "   "
              << fixed(r.error_h1) << "   " << (std::isnan(r.rate_h1) ? "  -  " : fixed(r.rate_h1, "%.2f")) << "\n";
    }
    write_atomic(dir / "convergence.csv", csv);
  } else if (config.experiment == "cylinder") {
    const auto s = run_cylinder(config);
    std::string csv = "t,energy,c_d,c_l,delta_p,div_l2,sav_slack\n";
    for (const auto& r : s.records)
      csv += csv_row({r.time, r.kinetic_energy, r.drag, r.lift, r.pressure_drop, r.div_l2, r.sav_bound_slack});
    write_atomic(dir / "cylinder.csv", csv);
    summary << "dofs " << s.dofs << " (vertices " << s.n_vertices << ", triangles " << s.n_triangles << ")\n"
            << "c_d,max " << format_number(s.drag_max) << " at t = " << format_number(s.drag_max_time) << "\n"
            << "c_l,max " << format_number(s.lift_max) << " at t = " << format_number(s.lift_max_time) << "\n"
            << "min projection slack " << format_number(s.min_sav_slack) << "\n"
            << "max |B u| " << format_number(s.max_divergence) << "\n"
            << "wall time " << fixed(s.wall_seconds, "%.1f") << " s\n";
  } else {
    const auto runs = run_offset_circles(config);
    for (const auto& run : runs) {
      std::string csv = "t,energy,enstrophy,identity_relative,sav_slack\n";
      for (const auto& r : run.records)
        csv += csv_row({r.time, r.kinetic_energy, r.enstrophy, r.energy_identity_relative, r.sav_bound_slack});
      const std::string name =
          "offset_re" + std::to_string(static_cast<long>(std::lround(run.reynolds))) + (run.sav ? "_sav" : "_nosav") + ".csv";
      write_atomic(dir / name, csv);
      summary << "Re " << run.reynolds << (run.sav ? " SAV  " : " NOSAV") << (run.completed ? " completed" : " diverged")
              << (run.completed ? "" : " at step " + std::to_string(run.diverged_step))
              << ", energy variation " << format_number(run.energy_variation) << ", max identity residual "
              << format_number(run.max_identity_relative) << ", stability " << format_number(run.stability_lhs)
              << " <= " << format_number(run.stability_rhs) << "\n";
    }
  }
  write_atomic(dir / "summary.txt", summary.str());
  write_atomic(dir / "config.cfg", echo_config(config));
  return summary.str();
}

}  // namespace savflow::experiments
