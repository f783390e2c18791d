#pragma once

#include "savflow/linalg.hpp"
#include "savflow/mesh.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

namespace savflow::spaces {

using linalg::SparseMatrix;
using linalg::Vector;

class SpaceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Rule on the reference triangle (0,0),(1,0),(0,1). Points are barycentric
/// (l0, l1, l2) with reference coordinates (xi, eta) = (l1, l2); weights
/// sum to the reference area 1/2.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Seven-point rule exact to degree 5; verified on first use.
const QuadratureRule& default_rule();

/// Collapsed Gauss-Legendre product rule exact to at least `degree`.
QuadratureRule conical_rule(int degree);

/// Largest absolute error over the monomials xi^a eta^b, a+b <= degree.
double monomial_error(const QuadratureRule& rule, int degree);

struct BasisValues {
  int n = 0;
  std::array<double, 6> values{};
  /// Gradients with respect to the reference coordinates (xi, eta).
  std::array<std::array<double, 2>, 6> grads{};
};

/// P1 hat functions or the six-node P2 basis: vertex nodes 0..2, then the
/// midpoint of edge j (joining vertices j and (j+1)%3) at 3+j.
BasisValues eval_basis(int degree, const std::array<double, 3>& bary);

/// Scalar continuous Lagrange space of degree 1 or 2. P2 numbers vertex
/// DOFs first, then one DOF per mesh edge.
class FeSpace {
public:
  FeSpace(std::shared_ptr<const mesh::Mesh> mesh, int degree);

  const mesh::Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const mesh::Mesh>& mesh_ptr() const noexcept { return mesh_; }
  int degree() const noexcept { return degree_; }
  std::size_t n_dofs() const noexcept { return dof_coords_.size(); }
  std::size_t dofs_per_element() const noexcept { return degree_ == 1 ? 3 : 6; }
  const std::vector<mesh::Point>& dof_coords() const noexcept { return dof_coords_; }
  std::span<const std::size_t> element_dofs(std::size_t t) const {
    return {element_dofs_.data() + t * dofs_per_element(), dofs_per_element()};
  }
  /// DOFs on boundary edges carrying any of `markers`, sorted and unique.
  std::vector<std::size_t> boundary_dofs(const std::set<int>& markers) const;

private:
  std::shared_ptr<const mesh::Mesh> mesh_;
  int degree_;
  std::vector<mesh::Point> dof_coords_;
  std::vector<std::size_t> element_dofs_;
};

/// Affine element map x = x0 + J (xi, eta).
struct ElementGeometry {
  mesh::Point origin;
  std::array<std::array<double, 2>, 2> jacobian{};
  /// Rows of J^{-T}: physical gradient = inv_t * reference gradient.
  std::array<std::array<double, 2>, 2> inv_t{};
  double det = 0.0;

  mesh::Point map(const std::array<double, 3>& bary) const;
  std::array<double, 2> physical_grad(const std::array<double, 2>& ref) const;
};

ElementGeometry element_geometry(const mesh::Mesh& m, std::size_t t);

/// Scalar (components = 1) or vector (components = 2) finite element field.
/// Vector coefficients are stored component by component.
struct FeFunction {
  std::shared_ptr<const FeSpace> space;
  int components = 1;
  Vector coeffs;

  FeFunction() = default;
  FeFunction(std::shared_ptr<const FeSpace> s, int n_components);
  FeFunction(std::shared_ptr<const FeSpace> s, int n_components, Vector c);

  std::span<double> component(int c) {
    return {coeffs.data() + static_cast<std::size_t>(c) * space->n_dofs(), space->n_dofs()};
  }
  std::span<const double> component(int c) const {
    return {coeffs.data() + static_cast<std::size_t>(c) * space->n_dofs(), space->n_dofs()};
  }
};

/// Value and physical gradient of every component at one point.
struct Sample {
  std::array<double, 2> value{};
  /// grad[c] = (d/dx, d/dy) of component c.
  std::array<std::array<double, 2>, 2> grad{};

  double div() const { return grad[0][0] + grad[1][1]; }
  double curl() const { return grad[1][0] - grad[0][1]; }
};

Sample sample(const FeFunction& f, std::size_t t, const std::array<double, 3>& bary);

using ScalarField = std::function<double(double x, double y)>;
using VectorField = std::function<std::array<double, 2>(double x, double y)>;

FeFunction interpolate(const ScalarField& f, std::shared_ptr<const FeSpace> space);
FeFunction interpolate(const VectorField& f, std::shared_ptr<const FeSpace> space);

/// Velocity boundary data on a set of markers.
struct DirichletBc {
  std::set<int> markers;
  std::function<std::array<double, 2>(double x, double y, double t)> value;
};

/// Constrained DOFs of a vector field over `space` (component-major
/// numbering) and their values at time t. Later conditions win on shared
/// DOFs. Throws when a marker is absent from the mesh.
struct Constraints {
  std::vector<std::size_t> dofs;
  std::vector<double> values;
};
Constraints dirichlet_constraints(const FeSpace& space, std::span<const DirichletBc> bcs, double t);

/// Symmetric elimination: constrained rows and columns are zeroed (entries
/// stay in the pattern), the diagonal set to one and the rhs corrected.
/// Every constrained diagonal must be stored.
void apply_dirichlet(SparseMatrix& a, Vector& rhs, const Constraints& c);

// Element weights, when given, scale each element's contribution (one per
// triangle). Matrices for vector fields act on component-major coefficients.

SparseMatrix assemble_mass(const FeSpace& space, int components = 1);
SparseMatrix assemble_stiffness(const FeSpace& space, int components = 1);
SparseMatrix assemble_divdiv(const FeSpace& velocity, std::span<const double> weights = {});
SparseMatrix assemble_curlcurl(const FeSpace& velocity, std::span<const double> weights = {});
/// B[q, v] = (div v, q).
SparseMatrix assemble_pressure_div(const FeSpace& velocity, const FeSpace& pressure);
/// C[l, v] = (l, curl v).
SparseMatrix assemble_curl_coupling(const FeSpace& velocity, const FeSpace& coarse,
                                    std::span<const double> weights = {});
/// N[i, j] = b(beta, phi_j, phi_i) with b(u,v,w) = ((u.grad v, w) - (u.grad w, v)) / 2.
SparseMatrix assemble_convection(const FeFunction& beta, const FeSpace& velocity);
/// Integrals of the basis functions.
Vector assemble_load_constant(const FeSpace& space);
/// (f, v) for a vector field f.
Vector assemble_load(const VectorField& f, const FeSpace& velocity);

/// L2 projection of curl u onto a scalar space, with a cached mass
/// factorization.
class CurlProjector {
public:
  CurlProjector(std::shared_ptr<const FeSpace> velocity, std::shared_ptr<const FeSpace> coarse);
  FeFunction project(const FeFunction& u) const;
  const SparseMatrix& coupling() const noexcept { return coupling_; }
  const SparseMatrix& mass() const noexcept { return mass_; }

private:
  std::shared_ptr<const FeSpace> velocity_;
  std::shared_ptr<const FeSpace> coarse_;
  SparseMatrix mass_;
  SparseMatrix coupling_;
  linalg::SparseLu lu_;
};

FeFunction l2_project_curl(const FeFunction& u, std::shared_ptr<const FeSpace> coarse);

struct Norms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  /// Vector fields only; zero for scalars.
  double div_l2 = 0.0;
  double curl_l2 = 0.0;
};

Norms norms(const FeFunction& f, const QuadratureRule& rule = default_rule());

/// Exact field with its gradient, d/dx and d/dy of each component.
struct ExactVector {
  VectorField value;
  std::function<std::array<std::array<double, 2>, 2>(double x, double y)> grad;
};

struct ErrorNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;
};

ErrorNorms error_norms(const FeFunction& u, const ExactVector& exact, const QuadratureRule& rule);

/// Smallest nonzero generalized singular value of B between the
/// velocity-gradient norm (all boundary velocity DOFs removed) and the
/// pressure L2 norm. The constant pressure mode is excluded. Dense; throws
/// beyond a few thousand unknowns.
double infsup_constant(const FeSpace& velocity, const FeSpace& pressure);

/// Component c of f at (x, y). Throws when the point lies outside the mesh.
double point_eval(const FeFunction& f, double x, double y, int component = 0);

/// Triangle containing (x, y) and the barycentric coordinates there.
std::pair<std::size_t, std::array<double, 3>> locate(const mesh::Mesh& m, double x, double y);

}  // namespace savflow::spaces
