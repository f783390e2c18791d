#pragma once

#include "savflow/diagnostics.hpp"
#include "savflow/parameters.hpp"
#include "savflow/solver.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace savflow::experiments {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Parsed `key = value` configuration of one experiment. Every key has an
/// experiment-specific default; only keys valid for the experiment are
/// accepted.
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> values;

  double number(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
};

std::vector<std::string> experiment_names();
/// Valid keys of an experiment, in echo order.
std::vector<std::string> valid_keys(const std::string& experiment);

/// Defaults, then the file (when non-empty), then the overrides. Values are
/// validated; errors name the key and, for unknown keys, list valid ones.
ExperimentConfig parse_config(const std::string& experiment, const std::filesystem::path& file,
                              const std::vector<std::pair<std::string, std::string>>& overrides);
ExperimentConfig parse_config_text(const std::string& experiment, const std::string& text,
                                   const std::vector<std::pair<std::string, std::string>>& overrides = {});
/// Re-parsable `key = value` text.
std::string echo_config(const ExperimentConfig& config);

// Manufactured solution on the unit square:
// u = g(t) (sin 2 pi y, cos 2 pi x), g = 1 + 0.01 t, p = x + y.
namespace manufactured {
std::array<double, 2> velocity(double x, double y, double t);
std::array<std::array<double, 2>, 2> velocity_gradient(double x, double y, double t);
double pressure(double x, double y);
std::array<double, 2> force(double x, double y, double t, double nu);
/// Largest strong-form residual u_t - nu Lap u + u.grad u + grad p - f at
/// `samples` random points, with derivatives taken by hyper-dual numbers.
double max_strong_residual(double nu, int samples, unsigned seed);
}  // namespace manufactured

/// Forcing of the offset-circles flow, (-4y(1-x^2-y^2), 4x(1-x^2-y^2)).
std::array<double, 2> rotating_force(double x, double y);
/// Channel inflow and outflow profile at height y and time t.
double channel_profile(double y, double t);

struct ConvergenceRow {
  double h = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t dofs = 0;
  double error_l2 = 0.0;
  double error_h1 = 0.0;
  double rate_l2 = diagnostics::not_available;
  double rate_h1 = diagnostics::not_available;
  double stability_lhs = 0.0;
  double stability_rhs = 0.0;
  double min_sav_slack = 0.0;
  double max_divergence = 0.0;
};

std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& config);

struct CylinderSummary {
  std::size_t dofs = 0;
  std::size_t n_vertices = 0;
  std::size_t n_triangles = 0;
  double drag_max = 0.0;
  double drag_max_time = 0.0;
  double lift_max = 0.0;
  double lift_max_time = 0.0;
  double min_sav_slack = 0.0;
  double max_divergence = 0.0;
  double wall_seconds = 0.0;
  std::vector<diagnostics::DiagnosticsRecord> records;
};

CylinderSummary run_cylinder(const ExperimentConfig& config);

struct OffsetRun {
  double reynolds = 0.0;
  bool sav = true;
  bool completed = false;
  std::size_t diverged_step = 0;
  double energy_variation = 0.0;
  double max_identity_relative = 0.0;
  double min_sav_slack = 0.0;
  double stability_lhs = 0.0;
  double stability_rhs = 0.0;
  std::vector<diagnostics::DiagnosticsRecord> records;
};

std::vector<OffsetRun> run_offset_circles(const ExperimentConfig& config);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);
/// Value with 17 significant digits; NaN printed as "nan".
std::string format_number(double v);

/// Runs one experiment and writes its CSV, summary and config echo into
/// the configured output directory. Returns the summary text.
std::string run_and_write(const ExperimentConfig& config);

}  // namespace savflow::experiments
