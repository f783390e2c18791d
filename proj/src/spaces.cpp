#include "savflow/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace savflow::spaces {

using mesh::Mesh;
using mesh::Point;

// ---------------------------------------------------------------------------
// Geometry and spaces

Point ElementGeometry::map(const std::array<double, 3>& l) const {
  return {origin.x + jacobian[0][0] * l[1] + jacobian[0][1] * l[2],
          origin.y + jacobian[1][0] * l[1] + jacobian[1][1] * l[2]};
}

std::array<double, 2> ElementGeometry::physical_grad(const std::array<double, 2>& g) const {
  return {inv_t[0][0] * g[0] + inv_t[0][1] * g[1], inv_t[1][0] * g[0] + inv_t[1][1] * g[1]};
}

ElementGeometry element_geometry(const Mesh& m, std::size_t t) {
  const auto& tri = m.triangles()[t];
  const Point& a = m.vertices()[tri[0]];
  const Point& b = m.vertices()[tri[1]];
  const Point& c = m.vertices()[tri[2]];
  ElementGeometry g;
  g.origin = a;
  g.jacobian = {{{b.x - a.x, c.x - a.x}, {b.y - a.y, c.y - a.y}}};
  g.det = g.jacobian[0][0] * g.jacobian[1][1] - g.jacobian[0][1] * g.jacobian[1][0];
  // J^{-T} = (1/det) [[J11, -J10], [-J01, J00]]
  g.inv_t = {{{g.jacobian[1][1] / g.det, -g.jacobian[1][0] / g.det},
              {-g.jacobian[0][1] / g.det, g.jacobian[0][0] / g.det}}};
  return g;
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> m, int degree) : mesh_(std::move(m)), degree_(degree) {
  if (!mesh_) throw SpaceError("FeSpace: null mesh");
  if (degree_ != 1 && degree_ != 2) throw SpaceError("FeSpace: unsupported degree " + std::to_string(degree_));
  dof_coords_ = mesh_->vertices();
  const std::size_t nv = mesh_->n_vertices();
  if (degree_ == 2) {
    for (const auto& e : mesh_->edges()) {
      const Point& a = mesh_->vertices()[e.v0];
      const Point& b = mesh_->vertices()[e.v1];
      dof_coords_.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
    }
  }
  element_dofs_.reserve(mesh_->n_triangles() * dofs_per_element());
  for (std::size_t t = 0; t < mesh_->n_triangles(); ++t) {
    for (auto v : mesh_->triangles()[t]) element_dofs_.push_back(v);
    if (degree_ == 2)
      for (auto e : mesh_->triangle_edges()[t]) element_dofs_.push_back(nv + e);
  }
}

std::vector<std::size_t> FeSpace::boundary_dofs(const std::set<int>& markers) const {
  std::vector<std::size_t> out;
  const auto& bes = mesh_->boundary_edges();
  for (std::size_t k = 0; k < bes.size(); ++k) {
    if (!markers.contains(bes[k].marker)) continue;
    out.push_back(bes[k].v0);
    out.push_back(bes[k].v1);
    if (degree_ == 2) {
      const auto [t, slot] = mesh_->boundary_edge_owner()[k];
      out.push_back(mesh_->n_vertices() + mesh_->triangle_edges()[t][static_cast<std::size_t>(slot)]);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FeFunction::FeFunction(std::shared_ptr<const FeSpace> s, int n_components)
    : space(std::move(s)), components(n_components) {
  if (!space) throw SpaceError("FeFunction: null space");
  if (components != 1 && components != 2) throw SpaceError("FeFunction: components must be 1 or 2");
  coeffs.assign(space->n_dofs() * static_cast<std::size_t>(components), 0.0);
}

FeFunction::FeFunction(std::shared_ptr<const FeSpace> s, int n_components, Vector c)
    : FeFunction(std::move(s), n_components) {
  if (c.size() != coeffs.size())
    throw SpaceError("FeFunction: " + std::to_string(c.size()) + " coefficients for " +
                     std::to_string(coeffs.size()) + " DOFs");
  coeffs = std::move(c);
}

namespace {

/// Basis values and physical gradients at every point of a rule, for one
/// element at a time.
class ElementValues {
public:
  ElementValues(int degree, const QuadratureRule& rule) : rule_(rule) {
    for (const auto& p : rule.points) ref_.push_back(eval_basis(degree, p));
    n_ = ref_.front().n;
    grads_.resize(rule.points.size());
  }

  void reinit(const Mesh& m, std::size_t t) {
    geom_ = element_geometry(m, t);
    for (std::size_t q = 0; q < ref_.size(); ++q)
      for (int i = 0; i < n_; ++i) grads_[q][i] = geom_.physical_grad(ref_[q].grads[i]);
  }

  int n() const { return n_; }
  std::size_t n_points() const { return ref_.size(); }
  double jxw(std::size_t q) const { return rule_.weights[q] * geom_.det; }
  double value(std::size_t q, int i) const { return ref_[q].values[i]; }
  const std::array<double, 2>& grad(std::size_t q, int i) const { return grads_[q][i]; }
  Point point(std::size_t q) const { return geom_.map(rule_.points[q]); }

private:
  const QuadratureRule& rule_;
  std::vector<BasisValues> ref_;
  int n_ = 0;
  std::vector<std::array<std::array<double, 2>, 6>> grads_;
  ElementGeometry geom_;
};

double weight_of(std::span<const double> weights, std::size_t t, std::size_t n_triangles) {
  if (weights.empty()) return 1.0;
  if (weights.size() != n_triangles)
    throw SpaceError("element weights: expected " + std::to_string(n_triangles) + ", got " +
                     std::to_string(weights.size()));
  return weights[t];
}

/// Local 2n x 2n block over (component, dof) pairs; fills a builder.
template <class Local>
SparseMatrix assemble_vector_form(const FeSpace& space, std::span<const double> weights, Local&& local) {
  const Mesh& m = space.mesh();
  const std::size_t n = space.n_dofs();
  linalg::CooBuilder coo(2 * n, 2 * n);
  ElementValues ev(space.degree(), default_rule());
  const int nb = ev.n();
  coo.reserve(m.n_triangles() * 4 * static_cast<std::size_t>(nb * nb));
  std::vector<double> a(static_cast<std::size_t>(4 * nb * nb));
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    const double w = weight_of(weights, t, m.n_triangles());
    ev.reinit(m, t);
    std::fill(a.begin(), a.end(), 0.0);
    for (std::size_t q = 0; q < ev.n_points(); ++q) {
      const double jxw = ev.jxw(q) * w;
      for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) {
          const auto blk = local(ev.grad(q, i), ev.grad(q, j));
          for (int ci = 0; ci < 2; ++ci)
            for (int cj = 0; cj < 2; ++cj)
              a[static_cast<std::size_t>((ci * nb + i) * 2 * nb + cj * nb + j)] += jxw * blk[ci][cj];
        }
    }
    const auto dofs = space.element_dofs(t);
    for (int ci = 0; ci < 2; ++ci)
      for (int i = 0; i < nb; ++i)
        for (int cj = 0; cj < 2; ++cj)
          for (int j = 0; j < nb; ++j)
            coo.add(ci * n + dofs[i], cj * n + dofs[j], a[static_cast<std::size_t>((ci * nb + i) * 2 * nb + cj * nb + j)]);
  }
  return coo.finalize();
}

/// Scalar form replicated on the diagonal blocks of `components`.
template <class Local>
SparseMatrix assemble_scalar_form(const FeSpace& space, int components, Local&& local) {
  const Mesh& m = space.mesh();
  const std::size_t n = space.n_dofs();
  const auto nc = static_cast<std::size_t>(components);
  linalg::CooBuilder coo(nc * n, nc * n);
  ElementValues ev(space.degree(), default_rule());
  const int nb = ev.n();
  coo.reserve(m.n_triangles() * nc * static_cast<std::size_t>(nb * nb));
  std::vector<double> a(static_cast<std::size_t>(nb * nb));
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    ev.reinit(m, t);
    std::fill(a.begin(), a.end(), 0.0);
    for (std::size_t q = 0; q < ev.n_points(); ++q)
      for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) a[static_cast<std::size_t>(i * nb + j)] += ev.jxw(q) * local(ev, q, i, j);
    const auto dofs = space.element_dofs(t);
    for (std::size_t c = 0; c < nc; ++c)
      for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) coo.add(c * n + dofs[i], c * n + dofs[j], a[static_cast<std::size_t>(i * nb + j)]);
  }
  return coo.finalize();
}

void check_components(int components) {
  if (components != 1 && components != 2) throw SpaceError("components must be 1 or 2");
}

void check_same_mesh(const FeSpace& a, const FeSpace& b) {
  if (a.mesh_ptr() != b.mesh_ptr() && !(a.mesh() == b.mesh()))
    throw SpaceError("spaces are defined on different meshes");
}

/// Rectangular form (scalar test space rows) x (vector trial columns).
template <class Local>
SparseMatrix assemble_mixed_form(const FeSpace& velocity, const FeSpace& scalar, std::span<const double> weights,
                                 Local&& local) {
  check_same_mesh(velocity, scalar);
  const Mesh& m = velocity.mesh();
  const std::size_t n = velocity.n_dofs();
  linalg::CooBuilder coo(scalar.n_dofs(), 2 * n);
  ElementValues ev(velocity.degree(), default_rule());
  ElementValues es(scalar.degree(), default_rule());
  const int nb = ev.n(), ns = es.n();
  std::vector<double> a(static_cast<std::size_t>(ns * 2 * nb));
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    const double w = weight_of(weights, t, m.n_triangles());
    ev.reinit(m, t);
    es.reinit(m, t);
    std::fill(a.begin(), a.end(), 0.0);
    for (std::size_t q = 0; q < ev.n_points(); ++q) {
      const double jxw = ev.jxw(q) * w;
      for (int l = 0; l < ns; ++l)
        for (int j = 0; j < nb; ++j) {
          const auto pair = local(ev.grad(q, j));
          for (int c = 0; c < 2; ++c) a[static_cast<std::size_t>(l * 2 * nb + c * nb + j)] += jxw * es.value(q, l) * pair[c];
        }
    }
    const auto vd = velocity.element_dofs(t);
    const auto sd = scalar.element_dofs(t);
    for (int l = 0; l < ns; ++l)
      for (int c = 0; c < 2; ++c)
        for (int j = 0; j < nb; ++j) coo.add(sd[l], c * n + vd[j], a[static_cast<std::size_t>(l * 2 * nb + c * nb + j)]);
  }
  return coo.finalize();
}

}  // namespace

Sample sample(const FeFunction& f, std::size_t t, const std::array<double, 3>& bary) {
  const FeSpace& s = *f.space;
  const auto b = eval_basis(s.degree(), bary);
  const auto g = element_geometry(s.mesh(), t);
  const auto dofs = s.element_dofs(t);
  Sample out;
  for (int c = 0; c < f.components; ++c) {
    const auto coef = f.component(c);
    for (int i = 0; i < b.n; ++i) {
      const double v = coef[dofs[i]];
      const auto gr = g.physical_grad(b.grads[i]);
      out.value[c] += v * b.values[i];
      out.grad[c][0] += v * gr[0];
      out.grad[c][1] += v * gr[1];
    }
  }
  return out;
}

FeFunction interpolate(const ScalarField& f, std::shared_ptr<const FeSpace> space) {
  FeFunction out(space, 1);
  const auto& pts = space->dof_coords();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.coeffs[i] = f(pts[i].x, pts[i].y);
    if (!std::isfinite(out.coeffs[i]))
      throw SpaceError("interpolate: non-finite value at DOF " + std::to_string(i));
  }
  return out;
}

FeFunction interpolate(const VectorField& f, std::shared_ptr<const FeSpace> space) {
  FeFunction out(space, 2);
  const auto& pts = space->dof_coords();
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = f(pts[i].x, pts[i].y);
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
      throw SpaceError("interpolate: non-finite value at DOF " + std::to_string(i));
    out.coeffs[i] = v[0];
    out.coeffs[n + i] = v[1];
  }
  return out;
}

Constraints dirichlet_constraints(const FeSpace& space, std::span<const DirichletBc> bcs, double t) {
  const auto present = space.mesh().markers();
  const std::size_t n = space.n_dofs();
  std::vector<double> value(2 * n, 0.0);
  std::vector<char> set(n, 0);
  for (const auto& bc : bcs) {
    for (int mk : bc.markers)
      if (!present.contains(mk)) throw SpaceError("Dirichlet marker " + std::to_string(mk) + " not present on mesh");
    for (auto d : space.boundary_dofs(bc.markers)) {
      const auto& p = space.dof_coords()[d];
      const auto v = bc.value(p.x, p.y, t);
      if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
        throw SpaceError("Dirichlet value is not finite at (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
      value[d] = v[0];
      value[n + d] = v[1];
      set[d] = 1;
    }
  }
  Constraints c;
  for (std::size_t comp = 0; comp < 2; ++comp)
    for (std::size_t d = 0; d < n; ++d)
      if (set[d]) {
        c.dofs.push_back(comp * n + d);
        c.values.push_back(value[comp * n + d]);
      }
  return c;
}

void apply_dirichlet(SparseMatrix& a, Vector& rhs, const Constraints& c) {
  const std::size_t n = a.n_rows();
  if (rhs.size() != n) throw SpaceError("apply_dirichlet: rhs size mismatch");
  std::vector<char> fixed(n, 0);
  std::vector<double> g(n, 0.0);
  for (std::size_t k = 0; k < c.dofs.size(); ++k) {
    if (c.dofs[k] >= n) throw SpaceError("apply_dirichlet: constrained DOF out of range");
    fixed[c.dofs[k]] = 1;
    g[c.dofs[k]] = c.values[k];
  }
  const auto& off = a.row_offsets();
  const auto& col = a.col_indices();
  auto& val = a.values();
  for (std::size_t i = 0; i < n; ++i) {
    if (fixed[i]) {
      bool has_diag = false;
      for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
        if (col[k] == i) {
          val[k] = 1.0;
          has_diag = true;
        } else {
          val[k] = 0.0;
        }
      }
      if (!has_diag) throw SpaceError("apply_dirichlet: missing diagonal in row " + std::to_string(i));
      rhs[i] = g[i];
    } else {
      for (std::size_t k = off[i]; k < off[i + 1]; ++k)
        if (fixed[col[k]]) {
          rhs[i] -= val[k] * g[col[k]];
          val[k] = 0.0;
        }
    }
  }
}

// ---------------------------------------------------------------------------
// Assembly

SparseMatrix assemble_mass(const FeSpace& space, int components) {
  check_components(components);
  return assemble_scalar_form(space, components, [](const ElementValues& ev, std::size_t q, int i, int j) {
    return ev.value(q, i) * ev.value(q, j);
  });
}

SparseMatrix assemble_stiffness(const FeSpace& space, int components) {
  check_components(components);
  return assemble_scalar_form(space, components, [](const ElementValues& ev, std::size_t q, int i, int j) {
    const auto& gi = ev.grad(q, i);
    const auto& gj = ev.grad(q, j);
    return gi[0] * gj[0] + gi[1] * gj[1];
  });
}

SparseMatrix assemble_divdiv(const FeSpace& velocity, std::span<const double> weights) {
  // div(phi e_c) = d_c phi
  return assemble_vector_form(velocity, weights, [](const std::array<double, 2>& gi, const std::array<double, 2>& gj) {
    return std::array<std::array<double, 2>, 2>{{{gi[0] * gj[0], gi[0] * gj[1]}, {gi[1] * gj[0], gi[1] * gj[1]}}};
  });
}

SparseMatrix assemble_curlcurl(const FeSpace& velocity, std::span<const double> weights) {
  // curl(phi e_1) = -d_y phi, curl(phi e_2) = d_x phi
  return assemble_vector_form(velocity, weights, [](const std::array<double, 2>& gi, const std::array<double, 2>& gj) {
    return std::array<std::array<double, 2>, 2>{{{gi[1] * gj[1], -gi[1] * gj[0]}, {-gi[0] * gj[1], gi[0] * gj[0]}}};
  });
}

SparseMatrix assemble_pressure_div(const FeSpace& velocity, const FeSpace& pressure) {
  return assemble_mixed_form(velocity, pressure, {}, [](const std::array<double, 2>& g) {
    return std::array<double, 2>{g[0], g[1]};
  });
}

SparseMatrix assemble_curl_coupling(const FeSpace& velocity, const FeSpace& coarse, std::span<const double> weights) {
  return assemble_mixed_form(velocity, coarse, weights, [](const std::array<double, 2>& g) {
    return std::array<double, 2>{-g[1], g[0]};
  });
}

SparseMatrix assemble_convection(const FeFunction& beta, const FeSpace& velocity) {
  if (beta.components != 2) throw SpaceError("assemble_convection: beta must be a vector field");
  check_same_mesh(*beta.space, velocity);
  const FeSpace& bs = *beta.space;
  const Mesh& m = velocity.mesh();
  const std::size_t n = velocity.n_dofs();
  const QuadratureRule& rule = default_rule();
  ElementValues ev(velocity.degree(), rule);
  std::vector<BasisValues> bref;
  for (const auto& p : rule.points) bref.push_back(eval_basis(bs.degree(), p));
  const int nb = ev.n();
  linalg::CooBuilder coo(2 * n, 2 * n);
  coo.reserve(m.n_triangles() * 2 * static_cast<std::size_t>(nb * nb));
  std::vector<double> a(static_cast<std::size_t>(nb * nb));
  const auto b1 = beta.component(0), b2 = beta.component(1);
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    ev.reinit(m, t);
    std::fill(a.begin(), a.end(), 0.0);
    const auto bd = bs.element_dofs(t);
    for (std::size_t q = 0; q < ev.n_points(); ++q) {
      double bx = 0.0, by = 0.0;
      for (int k = 0; k < bref[q].n; ++k) {
        bx += b1[bd[k]] * bref[q].values[k];
        by += b2[bd[k]] * bref[q].values[k];
      }
      const double jxw = ev.jxw(q);
      std::array<double, 6> adv{};
      for (int i = 0; i < nb; ++i) adv[i] = bx * ev.grad(q, i)[0] + by * ev.grad(q, i)[1];
      for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j)
          a[static_cast<std::size_t>(i * nb + j)] += 0.5 * jxw * (adv[j] * ev.value(q, i) - adv[i] * ev.value(q, j));
    }
    const auto dofs = velocity.element_dofs(t);
    for (std::size_t c = 0; c < 2; ++c)
      for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) coo.add(c * n + dofs[i], c * n + dofs[j], a[static_cast<std::size_t>(i * nb + j)]);
  }
  return coo.finalize();
}

Vector assemble_load_constant(const FeSpace& space) {
  Vector out(space.n_dofs(), 0.0);
  ElementValues ev(space.degree(), default_rule());
  for (std::size_t t = 0; t < space.mesh().n_triangles(); ++t) {
    ev.reinit(space.mesh(), t);
    const auto dofs = space.element_dofs(t);
    for (std::size_t q = 0; q < ev.n_points(); ++q)
      for (int i = 0; i < ev.n(); ++i) out[dofs[i]] += ev.jxw(q) * ev.value(q, i);
  }
  return out;
}

Vector assemble_load(const VectorField& f, const FeSpace& velocity) {
  const std::size_t n = velocity.n_dofs();
  Vector out(2 * n, 0.0);
  ElementValues ev(velocity.degree(), default_rule());
  for (std::size_t t = 0; t < velocity.mesh().n_triangles(); ++t) {
    ev.reinit(velocity.mesh(), t);
    const auto dofs = velocity.element_dofs(t);
    for (std::size_t q = 0; q < ev.n_points(); ++q) {
      const auto p = ev.point(q);
      const auto fv = f(p.x, p.y);
      for (int i = 0; i < ev.n(); ++i) {
        const double w = ev.jxw(q) * ev.value(q, i);
        out[dofs[i]] += w * fv[0];
        out[n + dofs[i]] += w * fv[1];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Projection

CurlProjector::CurlProjector(std::shared_ptr<const FeSpace> velocity, std::shared_ptr<const FeSpace> coarse)
    : velocity_(std::move(velocity)), coarse_(std::move(coarse)) {
  check_same_mesh(*velocity_, *coarse_);
  mass_ = assemble_mass(*coarse_);
  coupling_ = assemble_curl_coupling(*velocity_, *coarse_);
  lu_.factorize(mass_);
}

FeFunction CurlProjector::project(const FeFunction& u) const {
  if (u.components != 2 || u.space->n_dofs() != velocity_->n_dofs())
    throw SpaceError("CurlProjector: field does not belong to the velocity space");
  return FeFunction(coarse_, 1, lu_.solve(linalg::spmv(coupling_, u.coeffs)));
}

FeFunction l2_project_curl(const FeFunction& u, std::shared_ptr<const FeSpace> coarse) {
  return CurlProjector(u.space, std::move(coarse)).project(u);
}

// ---------------------------------------------------------------------------
// Norms and evaluation

Norms norms(const FeFunction& f, const QuadratureRule& rule) {
  const FeSpace& s = *f.space;
  const Mesh& m = s.mesh();
  Norms out;
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    const double det = element_geometry(m, t).det;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto v = sample(f, t, rule.points[q]);
      const double w = rule.weights[q] * det;
      for (int c = 0; c < f.components; ++c) {
        out.l2 += w * v.value[c] * v.value[c];
        out.h1_semi += w * (v.grad[c][0] * v.grad[c][0] + v.grad[c][1] * v.grad[c][1]);
      }
      if (f.components == 2) {
        out.div_l2 += w * v.div() * v.div();
        out.curl_l2 += w * v.curl() * v.curl();
      }
    }
  }
  out.l2 = std::sqrt(out.l2);
  out.h1_semi = std::sqrt(out.h1_semi);
  out.div_l2 = std::sqrt(out.div_l2);
  out.curl_l2 = std::sqrt(out.curl_l2);
  return out;
}

ErrorNorms error_norms(const FeFunction& u, const ExactVector& exact, const QuadratureRule& rule) {
  if (u.components != 2) throw SpaceError("error_norms: vector field expected");
  const Mesh& m = u.space->mesh();
  ErrorNorms out;
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    const auto g = element_geometry(m, t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto p = g.map(rule.points[q]);
      const auto v = sample(u, t, rule.points[q]);
      const auto ev = exact.value(p.x, p.y);
      const auto eg = exact.grad(p.x, p.y);
      const double w = rule.weights[q] * g.det;
      for (int c = 0; c < 2; ++c) {
        const double e = v.value[c] - ev[c];
        out.l2 += w * e * e;
        for (int d = 0; d < 2; ++d) {
          const double ge = v.grad[c][d] - eg[c][d];
          out.h1_semi += w * ge * ge;
        }
      }
    }
  }
  out.l2 = std::sqrt(out.l2);
  out.h1_semi = std::sqrt(out.h1_semi);
  return out;
}

std::pair<std::size_t, std::array<double, 3>> locate(const Mesh& m, double x, double y) {
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_t = 0;
  std::array<double, 3> best_l{};
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    const auto g = element_geometry(m, t);
    const double dx = x - g.origin.x, dy = y - g.origin.y;
    // (xi, eta) = J^{-1} (dx, dy); J^{-1} is the transpose of inv_t.
    const double xi = g.inv_t[0][0] * dx + g.inv_t[1][0] * dy;
    const double eta = g.inv_t[0][1] * dx + g.inv_t[1][1] * dy;
    const std::array<double, 3> l{1.0 - xi - eta, xi, eta};
    const double worst = std::min({l[0], l[1], l[2]});
    if (worst > best) {
      best = worst;
      best_t = t;
      best_l = l;
      if (worst >= 0.0) break;
    }
  }
  if (best < -1e-10)
    throw SpaceError("point (" + std::to_string(x) + ", " + std::to_string(y) + ") lies outside the mesh");
  for (auto& v : best_l) v = std::max(v, 0.0);
  const double s = best_l[0] + best_l[1] + best_l[2];
  for (auto& v : best_l) v /= s;
  return {best_t, best_l};
}

double point_eval(const FeFunction& f, double x, double y, int component) {
  if (component < 0 || component >= f.components) throw SpaceError("point_eval: component out of range");
  const auto [t, l] = locate(f.space->mesh(), x, y);
  return sample(f, t, l).value[component];
}

}  // namespace savflow::spaces
