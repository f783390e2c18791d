#include "savflow/solver.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace savflow::solver {

using linalg::SparseMatrix;
using linalg::Vector;

ProblemSetup make_setup(std::shared_ptr<const mesh::Mesh> m, std::vector<spaces::DirichletBc> bcs, Force force,
                        spaces::VectorField u0, bool homogeneous) {
  ProblemSetup s;
  s.mesh = m;
  s.velocity = std::make_shared<const FeSpace>(m, 2);
  s.pressure = std::make_shared<const FeSpace>(m, 1);
  s.coarse = s.pressure;
  s.bcs = std::move(bcs);
  s.force = std::move(force);
  s.u0 = std::move(u0);
  s.homogeneous = homogeneous;
  return s;
}

SavSolver::SavSolver(ProblemSetup setup, SavParameters params) : setup_(std::move(setup)), params_(std::move(params)) {
  if (!setup_.mesh || !setup_.velocity || !setup_.pressure || !setup_.coarse)
    throw ParameterError("problem setup is missing its mesh or spaces");
  if (setup_.velocity->degree() != 2 || setup_.pressure->degree() != 1 || setup_.coarse->degree() != 1)
    throw ParameterError("expected P2 velocity, P1 pressure and P1 coarse space");
  params_.validate(setup_.mesh->n_triangles());
  build_static();
}

void SavSolver::build_static() {
  const auto& vel = *setup_.velocity;
  const auto& pre = *setup_.pressure;
  nu_ = 2 * vel.n_dofs();
  np_ = pre.n_dofs();
  const bool subgrid = params_.sav_enabled && !params_.alpha1.empty();

  mass_ = spaces::assemble_mass(vel, 2);
  b_ = spaces::assemble_pressure_div(vel, pre);
  auto a = linalg::add(mass_, spaces::assemble_stiffness(vel, 2), 1.5 / params_.dt, params_.nu);
  a = linalg::add(a, spaces::assemble_divdiv(vel), 1.0, params_.alpha2);
  if (subgrid) a = linalg::add(a, spaces::assemble_curlcurl(vel, params_.alpha1));
  if (params_.sav_enabled) {
    projector_.emplace(setup_.velocity, setup_.coarse);
    if (subgrid) weighted_coupling_ = spaces::assemble_curl_coupling(vel, *setup_.coarse, params_.alpha1);
  }

  const auto bt = b_.transpose().scaled(-1.0);
  const auto mvec = spaces::assemble_load_constant(pre);
  linalg::CooBuilder col(np_, 1), row(1, np_);
  for (std::size_t i = 0; i < np_; ++i) {
    col.add(i, 0, mvec[i]);
    row.add(0, i, mvec[i]);
  }
  const auto mcol = col.finalize(), mrow = row.finalize();
  linalg::BlockSystem sys({nu_, np_, 1}, {nu_, np_, 1});
  sys.set_block(0, 0, &a);
  sys.set_block(0, 1, &bt);
  sys.set_block(1, 0, &b_);
  sys.set_block(1, 2, &mcol);
  sys.set_block(2, 1, &mrow);
  static_ = linalg::assemble_block(sys).first;

  // Positions of the convection pattern inside the monolithic matrix.
  const FeFunction zero(setup_.velocity, 2);
  const auto pattern = spaces::assemble_convection(zero, vel);
  convection_slots_.resize(pattern.nnz());
  for (std::size_t i = 0; i < pattern.n_rows(); ++i)
    for (std::size_t k = pattern.row_offsets()[i]; k < pattern.row_offsets()[i + 1]; ++k) {
      const auto slot = static_.find(i, pattern.col_indices()[k]);
      if (!slot) throw linalg::LinalgError("convection pattern is not contained in the velocity block");
      convection_slots_[k] = *slot;
    }
  work_ = static_;
}

SavState SavSolver::initialize() const {
  SavState s;
  s.u_curr = setup_.u0 ? spaces::interpolate(setup_.u0, setup_.velocity) : FeFunction(setup_.velocity, 2);
  s.u_prev = s.u_curr;
  s.p_curr = FeFunction(setup_.pressure, 1);
  s.s_curr = projector_ ? projector_->project(s.u_curr) : FeFunction(setup_.coarse, 1);
  return s;
}

SavState SavSolver::step(const SavState& state, StepReport* report) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n_next = state.step_index + 1;
  const double t_next = static_cast<double>(n_next) * params_.dt;
  const std::size_t total = nu_ + np_ + 1;

  // Projection of the current vorticity; involves only u^n.
  FeFunction s_next = projector_ ? projector_->project(state.u_curr) : FeFunction(setup_.coarse, 1);

  FeFunction beta(setup_.velocity, 2);
  if (params_.convection)
    for (std::size_t i = 0; i < nu_; ++i) beta.coeffs[i] = 2.0 * state.u_curr.coeffs[i] - state.u_prev.coeffs[i];
  const auto conv = spaces::assemble_convection(beta, *setup_.velocity);
  work_.values() = static_.values();
  for (std::size_t k = 0; k < convection_slots_.size(); ++k) work_.values()[convection_slots_[k]] += conv.values()[k];

  Vector hist(nu_);
  for (std::size_t i = 0; i < nu_; ++i) hist[i] = (4.0 * state.u_curr.coeffs[i] - state.u_prev.coeffs[i]) / (2.0 * params_.dt);
  const auto mh = linalg::spmv(mass_, hist);
  Vector rhs(total, 0.0);
  for (std::size_t i = 0; i < nu_; ++i) rhs[i] = mh[i];
  if (setup_.force) {
    const auto f = spaces::assemble_load(
        [&](double x, double y) { return setup_.force(x, y, t_next); }, *setup_.velocity);
    for (std::size_t i = 0; i < nu_; ++i) rhs[i] += f[i];
  }
  if (weighted_coupling_.n_rows() > 0) {
    const auto cs = linalg::spmv_transpose(weighted_coupling_, s_next.coeffs);
    for (std::size_t i = 0; i < nu_; ++i) rhs[i] += cs[i];
  }

  const auto constraints = spaces::dirichlet_constraints(*setup_.velocity, setup_.bcs, t_next);
  spaces::apply_dirichlet(work_, rhs, constraints);
  lu_.factorize(work_);
  const auto x = lu_.solve(rhs);

  for (std::size_t i = 0; i < total; ++i)
    if (!std::isfinite(x[i]))
      throw DivergenceError("non-finite solution at step " + std::to_string(n_next) + " (t = " +
                                std::to_string(t_next) + ")",
                            n_next);

  SavState next;
  next.u_prev = state.u_curr;
  next.u_curr = FeFunction(setup_.velocity, 2, Vector(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(nu_)));
  next.p_curr = FeFunction(setup_.pressure, 1,
                           Vector(x.begin() + static_cast<std::ptrdiff_t>(nu_),
                                  x.begin() + static_cast<std::ptrdiff_t>(nu_ + np_)));
  next.s_curr = std::move(s_next);
  next.step_index = n_next;
  next.time = t_next;

  if (report) {
    auto r = linalg::spmv(work_, x);
    for (std::size_t i = 0; i < total; ++i) r[i] -= rhs[i];
    const double bn = linalg::norm2(rhs);
    report->linear_residual = linalg::norm2(r) / (bn > 0.0 ? bn : 1.0);
    report->velocity_dofs = nu_;
    report->pressure_dofs = np_;
    report->total_dofs = total;
    report->divergence = linalg::norm_inf(linalg::spmv(b_, next.u_curr.coeffs));
    report->multiplier = x[total - 1];
    report->wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return next;
}

DiagnosticsRecord make_record(const SavSolver& solver, const SavState* before, const SavState& after,
                              const StepReport* report, const RunOptions& options) {
  const auto& setup = solver.setup();
  const auto& params = solver.params();
  const auto& m = *setup.mesh;
  const auto& rule = spaces::default_rule();
  const bool subgrid = params.sav_enabled && !params.alpha1.empty();

  DiagnosticsRecord r;
  r.step = after.step_index;
  r.time = after.time;
  double curl_sq = 0.0;
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    const auto g = spaces::element_geometry(m, t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * g.det;
      const auto a = spaces::sample(after.u_curr, t, rule.points[q]);
      const auto b = spaces::sample(after.u_prev, t, rule.points[q]);
      for (int c = 0; c < 2; ++c) {
        r.u_sq += w * a.value[c] * a.value[c];
        const double e = 2.0 * a.value[c] - b.value[c];
        r.extrap_sq += w * e * e;
        r.grad_sq += w * (a.grad[c][0] * a.grad[c][0] + a.grad[c][1] * a.grad[c][1]);
      }
      r.div_sq += w * a.div() * a.div();
      curl_sq += w * a.curl() * a.curl();
      if (subgrid) r.curl_sq_alpha += w * params.alpha1[t] * a.curl() * a.curl();
      if (setup.force) {
        const auto p = g.map(rule.points[q]);
        const auto f = setup.force(p.x, p.y, after.time);
        r.force_sq += w * (f[0] * f[0] + f[1] * f[1]);
      }
    }
  }
  r.kinetic_energy = 0.5 * r.u_sq;
  r.enstrophy = 0.5 * params.nu * curl_sq;
  r.div_l2 = std::sqrt(r.div_sq);
  r.div_discrete = report ? report->divergence
                          : linalg::norm_inf(linalg::spmv(solver.pressure_div(), after.u_curr.coeffs));
  r.linear_residual = report ? report->linear_residual : 0.0;

  if (before) {
    if (setup.homogeneous) {
      const auto ledger = diagnostics::energy_ledger(after.u_curr, before->u_curr, before->u_prev, &after.s_curr,
                                                     params, setup.force, after.time);
      r.energy_identity_residual = ledger.residual();
      r.energy_identity_relative = diagnostics::energy_identity_check(ledger);
    }
    if (params.sav_enabled) r.sav_bound_slack = diagnostics::sav_bound_check(after.s_curr, before->u_curr);
  }
  if (options.exact) {
    const auto e = spaces::error_norms(after.u_curr, options.exact(after.time),
                                       spaces::conical_rule(options.error_quadrature_degree));
    r.error_l2 = e.l2;
    r.error_h1 = e.h1_semi;
  }
  if (options.cylinder_quantities) {
    const auto dl = diagnostics::drag_lift(after.u_curr, after.p_curr, params.nu);
    r.drag = dl.drag;
    r.lift = dl.lift;
    r.pressure_drop = diagnostics::pressure_drop(after.p_curr);
  }
  return r;
}

std::vector<DiagnosticsRecord> run(SavSolver& solver, const RunOptions& options, const std::vector<Observer>& observers) {
  const std::size_t n = solver.params().n_steps();
  std::vector<DiagnosticsRecord> records;
  records.reserve(n + 1);
  SavState state = solver.initialize();
  records.push_back(make_record(solver, nullptr, state, nullptr, options));
  for (const auto& o : observers) o(state, records.back());
  for (std::size_t k = 0; k < n; ++k) {
    StepReport report;
    SavState next = solver.step(state, &report);
    records.push_back(make_record(solver, &state, next, &report, options));
    for (const auto& o : observers) o(next, records.back());
    state = std::move(next);
  }
  return records;
}

}  // namespace savflow::solver
