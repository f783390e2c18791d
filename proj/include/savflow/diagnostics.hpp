#pragma once

#include "savflow/parameters.hpp"
#include "savflow/spaces.hpp"

#include <array>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace savflow::diagnostics {

using spaces::FeFunction;

inline constexpr double not_available = std::numeric_limits<double>::quiet_NaN();

/// Body force f(x, y, t).
using Force = std::function<std::array<double, 2>(double x, double y, double t)>;

/// Per-step quantities. Fields that do not apply to a run are NaN.
struct DiagnosticsRecord {
  std::size_t step = 0;
  double time = 0.0;
  double kinetic_energy = 0.0;
  double enstrophy = 0.0;
  double drag = not_available;
  double lift = not_available;
  double pressure_drop = not_available;
  double energy_identity_residual = not_available;
  /// Residual divided by the largest term of the identity.
  double energy_identity_relative = not_available;
  double sav_bound_slack = not_available;
  double div_l2 = 0.0;
  /// max |B u| over pressure DOFs.
  double div_discrete = 0.0;
  double linear_residual = 0.0;
  double error_l2 = not_available;
  double error_h1 = not_available;

  // Inputs of the stability ledger.
  double u_sq = 0.0;           // |u^n|^2
  double extrap_sq = 0.0;      // |2u^n - u^{n-1}|^2
  double grad_sq = 0.0;        // |grad u^n|^2
  double div_sq = 0.0;         // |div u^n|^2
  double curl_sq_alpha = 0.0;  // sum_K alpha1_K |curl u^n|_K^2
  double force_sq = 0.0;       // |f(t^n)|^2
};

/// Terms of the per-step energy identity obtained by testing the momentum
/// equation with u^{n+1}.
struct EnergyLedger {
  double d_norm = 0.0;       // (|a|^2 - |b|^2) / (4 dt)
  double d_extrap = 0.0;     // (|2a-b|^2 - |2b-c|^2) / (4 dt)
  double d_second = 0.0;     // |a - 2b + c|^2 / (4 dt)
  double viscous = 0.0;      // nu |grad a|^2
  double subgrid = 0.0;      // sum_K alpha1_K (curl a - S, curl a)_K
  double graddiv = 0.0;      // alpha2 |div a|^2
  double forcing = 0.0;      // (f(t^{n+1}), a)

  double residual() const { return d_norm + d_extrap + d_second + viscous + subgrid + graddiv - forcing; }
  double largest() const;
};

double energy(const FeFunction& u);
double enstrophy(const FeFunction& u, double nu);

/// a = u^{n+1}, b = u^n, c = u^{n-1}, s_next = S_H^{n+1} (ignored when the
/// subgrid terms are off). Every term is recomputed by quadrature.
EnergyLedger energy_ledger(const FeFunction& a, const FeFunction& b, const FeFunction& c, const FeFunction* s_next,
                           const SavParameters& params, const Force& f, double t_next);

/// Relative residual of the identity; zero when every term vanishes.
double energy_identity_check(const EnergyLedger& ledger);

/// |curl u_curr| - |s_next|.
double sav_bound_check(const FeFunction& s_next, const FeFunction& u_curr);

/// Upper bound of the Poincare-Friedrichs constant from the narrowest
/// bounding-box width of the domain: |v| <= (w / pi) |grad v| on H^1_0.
double poincare_bound(const mesh::Mesh& m);

struct StabilityLedger {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs * (1.0 + 1e-12) + 1e-300; }
};

/// Both sides of the discrete stability estimate over records 0..N, with
/// the dual norm of f bounded by c_pf |f|.
StabilityLedger stability_ledger(std::span<const DiagnosticsRecord> records, const SavParameters& params, double c_pf);

struct DragLift {
  double drag = 0.0;
  double lift = 0.0;
};

/// Coefficients on the boundary edges carrying `marker`, with prefactor
/// 2 / (rho L U^2) = 20 and the normal pointing from the obstacle into the
/// fluid.
DragLift drag_lift(const FeFunction& u, const FeFunction& p, double nu, int marker = mesh::markers::cylinder);

/// p(0.15, 0.2) - p(0.25, 0.2).
double pressure_drop(const FeFunction& p);

enum class ErrorMode { l2_in_time_of_l2, l2_in_time_of_h1 };

/// sqrt(dt * sum_{n>=1} e_n^2) over the records' stored per-step errors.
double error_norm(std::span<const DiagnosticsRecord> records, double dt, ErrorMode mode);

/// Total variation of the kinetic energy series.
double energy_variation(std::span<const DiagnosticsRecord> records);

}  // namespace savflow::diagnostics
