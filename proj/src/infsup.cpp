#include "savflow/spaces.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <string>

namespace savflow::spaces {

namespace {

Eigen::MatrixXd dense(const SparseMatrix& a, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  std::vector<long> col_map(a.n_cols(), -1);
  for (std::size_t j = 0; j < cols.size(); ++j) col_map[cols[j]] = static_cast<long>(j);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<long>(rows.size()), static_cast<long>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = a.row_offsets()[rows[i]]; k < a.row_offsets()[rows[i] + 1]; ++k) {
      const long j = col_map[a.col_indices()[k]];
      if (j >= 0) out(static_cast<long>(i), j) = a.values()[k];
    }
  return out;
}

}  // namespace

double infsup_constant(const FeSpace& velocity, const FeSpace& pressure) {
  constexpr std::size_t max_unknowns = 5000;
  const std::size_t n = velocity.n_dofs();
  const auto boundary = velocity.boundary_dofs(velocity.mesh().markers());
  std::vector<char> on_boundary(n, 0);
  for (auto d : boundary) on_boundary[d] = 1;
  std::vector<std::size_t> interior;
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t d = 0; d < n; ++d)
      if (!on_boundary[d]) interior.push_back(c * n + d);
  if (interior.size() + pressure.n_dofs() > max_unknowns)
    throw SpaceError("infsup_constant: " + std::to_string(interior.size() + pressure.n_dofs()) +
                     " unknowns exceed the dense limit; skip on this mesh");
  if (interior.empty()) throw SpaceError("infsup_constant: no interior velocity DOFs");

  std::vector<std::size_t> all_p(pressure.n_dofs());
  for (std::size_t i = 0; i < all_p.size(); ++i) all_p[i] = i;
  const Eigen::MatrixXd k = dense(assemble_stiffness(velocity, 2), interior, interior);
  const Eigen::MatrixXd b = dense(assemble_pressure_div(velocity, pressure), all_p, interior);
  const Eigen::MatrixXd mp = dense(assemble_mass(pressure), all_p, all_p);

  // B K^{-1} B^T q = beta^2 Mp q
  const Eigen::MatrixXd s = b * Eigen::LLT<Eigen::MatrixXd>(k).solve(b.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (s + s.transpose()), mp,
                                                               Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw SpaceError("infsup_constant: eigensolver failed");
  const auto& ev = eig.eigenvalues();
  if (ev.size() < 2) throw SpaceError("infsup_constant: pressure space too small");
  // The smallest eigenvalue belongs to the constant pressure, which B^T
  // annihilates when all velocity boundary DOFs are removed.
  return std::sqrt(std::max(ev(1), 0.0));
}

}  // namespace savflow::spaces
