#include "savflow/spaces.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace savflow::spaces {

namespace {

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(unsigned n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (unsigned i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = std::legendre(n, z);
      const double pm = n > 1 ? std::legendre(n - 1, z) : 1.0;
      dp = n * (z * p - pm) / (z * z - 1.0);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double p = std::legendre(n, z);
    const double pm = n > 1 ? std::legendre(n - 1, z) : 1.0;
    dp = n * (z * p - pm) / (z * z - 1.0);
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

QuadratureRule make_seven_point() {
  const double s = std::sqrt(15.0);
  const double a = (6.0 - s) / 21.0, b = (6.0 + s) / 21.0;
  const double wa = (155.0 - s) / 2400.0, wb = (155.0 + s) / 2400.0;
  QuadratureRule r;
  r.degree = 5;
  r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  r.weights.push_back(9.0 / 80.0);
  for (int k = 0; k < 3; ++k) {
    std::array<double, 3> p{a, a, a};
    p[k] = 1.0 - 2.0 * a;
    r.points.push_back(p);
    r.weights.push_back(wa);
  }
  for (int k = 0; k < 3; ++k) {
    std::array<double, 3> p{b, b, b};
    p[k] = 1.0 - 2.0 * b;
    r.points.push_back(p);
    r.weights.push_back(wb);
  }
  return r;
}

}  // namespace

double monomial_error(const QuadratureRule& rule, int degree) {
  double worst = 0.0;
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b) {
      double q = 0.0;
      for (std::size_t k = 0; k < rule.weights.size(); ++k)
        q += rule.weights[k] * std::pow(rule.points[k][1], a) * std::pow(rule.points[k][2], b);
      const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
      worst = std::max(worst, std::abs(q - exact));
    }
  return worst;
}

const QuadratureRule& default_rule() {
  static const QuadratureRule rule = [] {
    auto r = make_seven_point();
    if (monomial_error(r, r.degree) > 1e-15)
      throw SpaceError("default quadrature rule fails its exactness check");
    return r;
  }();
  return rule;
}

QuadratureRule conical_rule(int degree) {
  if (degree < 0) throw SpaceError("conical_rule: negative degree " + std::to_string(degree));
  const unsigned n = static_cast<unsigned>(degree / 2 + 2);
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule r;
  r.degree = degree;
  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j < n; ++j) {
      // (u, v) in the unit square maps to (xi, eta) = (u, (1 - u) v).
      const double xi = x[i], eta = (1.0 - x[i]) * x[j];
      r.points.push_back({1.0 - xi - eta, xi, eta});
      r.weights.push_back(w[i] * w[j] * (1.0 - x[i]));
    }
  return r;
}

BasisValues eval_basis(int degree, const std::array<double, 3>& l) {
  // Reference gradients of the barycentric coordinates.
  static constexpr std::array<std::array<double, 2>, 3> dl{{{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}}};
  BasisValues b;
  if (degree == 1) {
    b.n = 3;
    for (int i = 0; i < 3; ++i) {
      b.values[i] = l[i];
      b.grads[i] = dl[i];
    }
  } else if (degree == 2) {
    b.n = 6;
    for (int i = 0; i < 3; ++i) {
      b.values[i] = l[i] * (2.0 * l[i] - 1.0);
      const double s = 4.0 * l[i] - 1.0;
      b.grads[i] = {s * dl[i][0], s * dl[i][1]};
    }
    for (int j = 0; j < 3; ++j) {
      const int i = j, k = (j + 1) % 3;
      b.values[3 + j] = 4.0 * l[i] * l[k];
      b.grads[3 + j] = {4.0 * (l[k] * dl[i][0] + l[i] * dl[k][0]), 4.0 * (l[k] * dl[i][1] + l[i] * dl[k][1])};
    }
  } else {
    throw SpaceError("eval_basis: unsupported degree " + std::to_string(degree));
  }
  return b;
}

}  // namespace savflow::spaces
