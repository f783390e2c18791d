#pragma once

#include "savflow/mesh.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace savflow {

class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct SavParameters {
  double nu = 1.0;
  /// Subgrid viscosity, one value per triangle. Empty means zero.
  std::vector<double> alpha1;
  double alpha2 = 0.0;
  double dt = 0.01;
  double t_end = 0.01;
  bool sav_enabled = true;
  /// Off only for linear (Stokes) checks: the convecting field is forced to zero.
  bool convection = true;

  /// Throws ParameterError naming the offending field.
  void validate(std::size_t n_triangles) const;
  /// Number of steps; t_end must be an integer multiple of dt up to 1e-9.
  std::size_t n_steps() const;
  double alpha1_max() const;
};

/// alpha1 = h^2 on every triangle with h the largest edge of the mesh.
std::vector<double> alpha1_uniform_h2(const mesh::Mesh& m);
/// alpha1 = h_K^2 with h_K the largest edge of triangle K.
std::vector<double> alpha1_per_element_h2(const mesh::Mesh& m);
std::vector<double> alpha1_constant(const mesh::Mesh& m, double value);

/// Same parameters with the subgrid terms and the projection switched off.
SavParameters nosav_mode(SavParameters p);

}  // namespace savflow
