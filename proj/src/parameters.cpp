#include "savflow/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace savflow {

void SavParameters::validate(std::size_t n_triangles) const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ParameterError("nu must be positive, got " + std::to_string(nu));
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive, got " + std::to_string(dt));
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ParameterError("t_end must be nonnegative");
  if (!(alpha2 >= 0.0) || !std::isfinite(alpha2)) throw ParameterError("alpha2 must be nonnegative");
  if (!alpha1.empty() && alpha1.size() != n_triangles)
    throw ParameterError("alpha1 has " + std::to_string(alpha1.size()) + " values for " + std::to_string(n_triangles) +
                         " triangles");
  for (double a : alpha1)
    if (!(a >= 0.0) || !std::isfinite(a)) throw ParameterError("alpha1 must be nonnegative");
  (void)n_steps();
}

std::size_t SavParameters::n_steps() const {
  const double r = t_end / dt;
  const double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, r))
    throw ParameterError("t_end = " + std::to_string(t_end) + " is not a multiple of dt = " + std::to_string(dt));
  return static_cast<std::size_t>(n);
}

double SavParameters::alpha1_max() const {
  return alpha1.empty() ? 0.0 : *std::max_element(alpha1.begin(), alpha1.end());
}

std::vector<double> alpha1_uniform_h2(const mesh::Mesh& m) {
  const double h = m.max_edge_length();
  return std::vector<double>(m.n_triangles(), h * h);
}

std::vector<double> alpha1_per_element_h2(const mesh::Mesh& m) {
  std::vector<double> out(m.n_triangles());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = m.diameter(t) * m.diameter(t);
  return out;
}

std::vector<double> alpha1_constant(const mesh::Mesh& m, double value) {
  return std::vector<double>(m.n_triangles(), value);
}

SavParameters nosav_mode(SavParameters p) {
  p.sav_enabled = false;
  return p;
}

}  // namespace savflow
