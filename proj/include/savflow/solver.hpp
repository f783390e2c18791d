#pragma once

#include "savflow/diagnostics.hpp"
#include "savflow/linalg.hpp"
#include "savflow/parameters.hpp"
#include "savflow/spaces.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace savflow::solver {

using diagnostics::DiagnosticsRecord;
using diagnostics::Force;
using spaces::FeFunction;
using spaces::FeSpace;

/// Raised when the solution stops being finite.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

struct ProblemSetup {
  std::shared_ptr<const mesh::Mesh> mesh;
  std::shared_ptr<const FeSpace> velocity;  // P2
  std::shared_ptr<const FeSpace> pressure;  // P1
  std::shared_ptr<const FeSpace> coarse;    // P1
  std::vector<spaces::DirichletBc> bcs;
  Force force;                  // empty means zero
  spaces::VectorField u0;       // empty means zero

  /// True when every boundary value is zero at all times; only then is the
  /// energy identity asserted.
  bool homogeneous = false;
};

/// Taylor-Hood spaces over `m` with all the given data.
ProblemSetup make_setup(std::shared_ptr<const mesh::Mesh> m, std::vector<spaces::DirichletBc> bcs, Force force,
                        spaces::VectorField u0, bool homogeneous);

struct SavState {
  FeFunction u_curr;
  FeFunction u_prev;
  FeFunction p_curr;
  FeFunction s_curr;
  std::size_t step_index = 0;
  double time = 0.0;
};

struct StepReport {
  double linear_residual = 0.0;
  double wall_seconds = 0.0;
  std::size_t velocity_dofs = 0;
  std::size_t pressure_dofs = 0;
  std::size_t total_dofs = 0;
  /// max |B u^{n+1}|
  double divergence = 0.0;
  /// Multiplier of the mean-zero pressure constraint.
  double multiplier = 0.0;
};

/// BDF2 with extrapolated convection, Taylor-Hood elements, grad-div and
/// optional subgrid artificial viscosity. Caches every constant operator
/// and the symbolic factorization.
class SavSolver {
public:
  SavSolver(ProblemSetup setup, SavParameters params);

  const ProblemSetup& setup() const noexcept { return setup_; }
  const SavParameters& params() const noexcept { return params_; }

  /// u^{-1} = u^0 = interpolant of u0; p = 0; S = projection of curl u^0.
  SavState initialize() const;
  SavState step(const SavState& state, StepReport* report = nullptr);

  /// Global system pieces, exposed for checks.
  const linalg::SparseMatrix& pressure_div() const noexcept { return b_; }
  const linalg::SparseMatrix& velocity_mass() const noexcept { return mass_; }

private:
  void build_static();

  ProblemSetup setup_;
  SavParameters params_;
  std::size_t nu_ = 0;  // velocity unknowns (both components)
  std::size_t np_ = 0;
  linalg::SparseMatrix mass_;
  linalg::SparseMatrix b_;
  linalg::SparseMatrix weighted_coupling_;
  std::optional<spaces::CurlProjector> projector_;
  linalg::SparseMatrix static_;   // monolithic, convection pattern included
  std::vector<std::size_t> convection_slots_;
  linalg::SparseMatrix work_;
  linalg::SparseLu lu_;
};

struct RunOptions {
  /// Drag, lift and pressure drop on marker 4.
  bool cylinder_quantities = false;
  /// Exact velocity u(x, y, t) and its gradient for error norms.
  std::function<spaces::ExactVector(double t)> exact;
  int error_quadrature_degree = 10;
};

using Observer = std::function<void(const SavState&, const DiagnosticsRecord&)>;

/// Diagnostics of `after`. When `before` is given, the step before -> after
/// also feeds the energy identity and the projection bound.
DiagnosticsRecord make_record(const SavSolver& solver, const SavState* before, const SavState& after,
                              const StepReport* report, const RunOptions& options);

/// Steps from initialize() to t_end, recording every state including the
/// initial one. Observers see each record after it is made.
std::vector<DiagnosticsRecord> run(SavSolver& solver, const RunOptions& options = {},
                                   const std::vector<Observer>& observers = {});

}  // namespace savflow::solver
