#pragma once

// Independent dense finite element reference: Lagrange bases built from a
// monomial Vandermonde system in physical coordinates, integrated with a
// collapsed Gauss rule whose nodes come from the Golub-Welsch eigenproblem.

#include "dense_oracle.hpp"
#include "savflow/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <functional>
#include <vector>

namespace savflow::test {

struct OraclePoint {
  double x, y, w;
};

/// Gauss rule on the physical triangle, exact for polynomials of degree 2n-2.
inline std::vector<OraclePoint> oracle_rule(const mesh::Point& a, const mesh::Point& b, const mesh::Point& c,
                                            int n = 6) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double off = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = jac(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  std::vector<double> z(n), w(n);
  for (int k = 0; k < n; ++k) {
    z[k] = 0.5 * (es.eigenvalues()(k) + 1.0);
    w[k] = es.eigenvectors()(0, k) * es.eigenvectors()(0, k);  // sums to 1 on [0,1]
  }
  const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  std::vector<OraclePoint> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double s = z[i], t = (1.0 - z[i]) * z[j];
      out.push_back({a.x + s * (b.x - a.x) + t * (c.x - a.x), a.y + s * (b.y - a.y) + t * (c.y - a.y),
                     w[i] * w[j] * (1.0 - z[i]) * det});
    }
  return out;
}

/// Nodal basis on one triangle: value and gradient of basis function k.
class OracleBasis {
public:
  OracleBasis(const std::vector<mesh::Point>& nodes, int degree) : degree_(degree) {
    const int n = static_cast<int>(nodes.size());
    cx_ = cy_ = 0.0;
    for (const auto& p : nodes) {
      cx_ += p.x / n;
      cy_ += p.y / n;
    }
    Eigen::MatrixXd v(n, n);
    for (int i = 0; i < n; ++i) {
      const auto m = monomials(nodes[i].x, nodes[i].y);
      for (int j = 0; j < n; ++j) v(i, j) = m[j];
    }
    // Columns of V^{-1} hold the monomial coefficients of each basis function.
    coef_ = v.inverse();
  }

  int size() const { return static_cast<int>(coef_.rows()); }

  double value(int k, double x, double y) const {
    const auto m = monomials(x, y);
    double s = 0.0;
    for (int j = 0; j < size(); ++j) s += coef_(j, k) * m[j];
    return s;
  }

  std::array<double, 2> grad(int k, double x, double y) const {
    const double X = x - cx_, Y = y - cy_;
    std::array<std::array<double, 2>, 6> d{};
    d[1] = {1.0, 0.0};
    d[2] = {0.0, 1.0};
    if (degree_ == 2) {
      d[3] = {2.0 * X, 0.0};
      d[4] = {Y, X};
      d[5] = {0.0, 2.0 * Y};
    }
    std::array<double, 2> g{0.0, 0.0};
    for (int j = 0; j < size(); ++j) {
      g[0] += coef_(j, k) * d[j][0];
      g[1] += coef_(j, k) * d[j][1];
    }
    return g;
  }

private:
  std::array<double, 6> monomials(double x, double y) const {
    const double X = x - cx_, Y = y - cy_;
    return {1.0, X, Y, X * X, X * Y, Y * Y};
  }

  int degree_;
  double cx_, cy_;
  Eigen::MatrixXd coef_;
};

/// Global DOF numbering (vertices, then edges in sorted order) and local
/// nodes of each triangle, derived from the vertex lists only.
struct OracleDofs {
  std::vector<std::vector<std::size_t>> dofs;
  std::vector<std::vector<mesh::Point>> nodes;
  std::size_t n = 0;
};

inline OracleDofs oracle_dofs(const mesh::Mesh& m, int degree) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& t : m.triangles())
    for (int j = 0; j < 3; ++j) edges.push_back(std::minmax(t[j], t[(j + 1) % 3]));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  OracleDofs out;
  out.n = m.n_vertices() + (degree == 2 ? edges.size() : 0);
  for (const auto& t : m.triangles()) {
    std::vector<std::size_t> d(t.begin(), t.end());
    std::vector<mesh::Point> p;
    for (auto v : t) p.push_back(m.vertices()[v]);
    if (degree == 2) {
      for (int j = 0; j < 3; ++j) {
        const std::pair<std::size_t, std::size_t> e = std::minmax(t[j], t[(j + 1) % 3]);
        d.push_back(m.n_vertices() +
                    static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), e) - edges.begin()));
        const auto& a = m.vertices()[t[j]];
        const auto& b = m.vertices()[t[(j + 1) % 3]];
        p.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
      }
    }
    out.dofs.push_back(d);
    out.nodes.push_back(p);
  }
  return out;
}

/// Integrand of a vector or scalar bilinear form: (test basis k with
/// component ci, trial basis l with component cj) at a point.
using OracleForm = std::function<double(const OracleBasis& test, int k, int ci, const OracleBasis& trial, int l,
                                        int cj, double x, double y)>;

/// Dense matrix of size (rc * n_test) x (cc * n_trial).
inline Dense oracle_assemble(const mesh::Mesh& m, int test_degree, int rc, int trial_degree, int cc,
                             const OracleForm& form) {
  const auto td = oracle_dofs(m, test_degree);
  const auto sd = oracle_dofs(m, trial_degree);
  Dense out(rc * td.n, cc * sd.n);
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    const OracleBasis bt(td.nodes[t], test_degree), bs(sd.nodes[t], trial_degree);
    const auto& tri = m.triangles()[t];
    const auto rule = oracle_rule(m.vertices()[tri[0]], m.vertices()[tri[1]], m.vertices()[tri[2]]);
    for (int ci = 0; ci < rc; ++ci)
      for (int k = 0; k < bt.size(); ++k)
        for (int cj = 0; cj < cc; ++cj)
          for (int l = 0; l < bs.size(); ++l) {
            double s = 0.0;
            for (const auto& q : rule) s += q.w * form(bt, k, ci, bs, l, cj, q.x, q.y);
            out(ci * td.n + td.dofs[t][k], cj * sd.n + sd.dofs[t][l]) += s;
          }
  }
  return out;
}

/// Value of a vector P2 field (component-major coefficients) on triangle t.
inline std::array<double, 2> oracle_vector_value(const mesh::Mesh& m, std::size_t t, const std::vector<double>& coef,
                                                 double x, double y) {
  const auto d = oracle_dofs(m, 2);
  const OracleBasis b(d.nodes[t], 2);
  std::array<double, 2> v{0.0, 0.0};
  for (int k = 0; k < b.size(); ++k) {
    const double phi = b.value(k, x, y);
    v[0] += coef[d.dofs[t][k]] * phi;
    v[1] += coef[d.n + d.dofs[t][k]] * phi;
  }
  return v;
}

}  // namespace savflow::test
