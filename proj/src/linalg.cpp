#include "savflow/linalg.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace savflow::linalg {

SparseMatrix::SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                           std::vector<std::size_t> col_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  validate();
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> offsets(n + 1);
  std::iota(offsets.begin(), offsets.end(), std::size_t{0});
  std::vector<std::size_t> cols(n);
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::zero(std::size_t n_rows, std::size_t n_cols) {
  return SparseMatrix(n_rows, n_cols, std::vector<std::size_t>(n_rows + 1, 0), {}, {});
}

void SparseMatrix::validate() const {
  if (row_offsets_.size() != n_rows_ + 1) throw LinalgError("CSR: row_offsets must have n_rows+1 entries");
  if (row_offsets_.front() != 0) throw LinalgError("CSR: row_offsets must start at 0");
  if (row_offsets_.back() != values_.size() || col_indices_.size() != values_.size())
    throw LinalgError("CSR: value/column array length does not match row_offsets");
  for (std::size_t i = 0; i < n_rows_; ++i) {
    if (row_offsets_[i] > row_offsets_[i + 1]) throw LinalgError("CSR: row_offsets must be nondecreasing");
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      if (col_indices_[k] >= n_cols_) throw LinalgError("CSR: column index out of range in row " + std::to_string(i));
      if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1])
        throw LinalgError("CSR: column indices not strictly increasing in row " + std::to_string(i));
    }
  }
}

std::optional<std::size_t> SparseMatrix::find(std::size_t i, std::size_t j) const {
  if (i >= n_rows_) return std::nullopt;
  auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return std::nullopt;
  return static_cast<std::size_t>(it - col_indices_.begin());
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  auto k = find(i, j);
  return k ? values_[*k] : 0.0;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<std::size_t> offsets(n_cols_ + 1, 0);
  for (auto c : col_indices_) ++offsets[c + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  std::vector<std::size_t> cols(nnz());
  std::vector<double> vals(nnz());
  for (std::size_t i = 0; i < n_rows_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      auto dst = cursor[col_indices_[k]]++;
      cols[dst] = i;
      vals[dst] = values_[k];
    }
  }
  return SparseMatrix(n_cols_, n_rows_, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::scaled(double alpha) const {
  SparseMatrix out = *this;
  for (auto& v : out.values_) v *= alpha;
  return out;
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> dense(n_rows_ * n_cols_, 0.0);
  for (std::size_t i = 0; i < n_rows_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) dense[i * n_cols_ + col_indices_[k]] += values_[k];
  return dense;
}

void CooBuilder::add(std::size_t row, std::size_t col, double value) {
  if (row >= n_rows_ || col >= n_cols_)
    throw LinalgError("CooBuilder: entry (" + std::to_string(row) + ", " + std::to_string(col) + ") out of range");
  triplets_.push_back({row, col, value});
}

SparseMatrix CooBuilder::finalize() const {
  // Counting sort by row, then sort columns inside each row.
  std::vector<std::size_t> offsets(n_rows_ + 1, 0);
  for (const auto& t : triplets_) ++offsets[t.row + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  std::vector<std::pair<std::size_t, double>> entries(triplets_.size());
  for (const auto& t : triplets_) entries[cursor[t.row]++] = {t.col, t.value};

  std::vector<std::size_t> out_offsets(n_rows_ + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  cols.reserve(entries.size());
  vals.reserve(entries.size());
  for (std::size_t i = 0; i < n_rows_; ++i) {
    auto first = entries.begin() + static_cast<std::ptrdiff_t>(offsets[i]);
    auto last = entries.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]);
    std::stable_sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto it = first; it != last; ++it) {
      if (cols.size() > out_offsets[i] && cols.back() == it->first) {
        vals.back() += it->second;
      } else {
        cols.push_back(it->first);
        vals.push_back(it->second);
      }
    }
    out_offsets[i + 1] = cols.size();
  }
  return SparseMatrix(n_rows_, n_cols_, std::move(out_offsets), std::move(cols), std::move(vals));
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
  if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols()) throw LinalgError("add: dimension mismatch");
  std::vector<std::size_t> offsets(a.n_rows() + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  cols.reserve(a.nnz() + b.nnz());
  vals.reserve(a.nnz() + b.nnz());
  const auto& ao = a.row_offsets();
  const auto& bo = b.row_offsets();
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    std::size_t ka = ao[i], kb = bo[i];
    while (ka < ao[i + 1] || kb < bo[i + 1]) {
      std::size_t ca = ka < ao[i + 1] ? a.col_indices()[ka] : SIZE_MAX;
      std::size_t cb = kb < bo[i + 1] ? b.col_indices()[kb] : SIZE_MAX;
      if (ca == cb) {
        cols.push_back(ca);
        vals.push_back(alpha * a.values()[ka++] + beta * b.values()[kb++]);
      } else if (ca < cb) {
        cols.push_back(ca);
        vals.push_back(alpha * a.values()[ka++]);
      } else {
        cols.push_back(cb);
        vals.push_back(beta * b.values()[kb++]);
      }
    }
    offsets[i + 1] = cols.size();
  }
  return SparseMatrix(a.n_rows(), a.n_cols(), std::move(offsets), std::move(cols), std::move(vals));
}

void add_into(SparseMatrix& dst, const SparseMatrix& src, double alpha) {
  if (dst.n_rows() != src.n_rows() || dst.n_cols() != src.n_cols()) throw LinalgError("add_into: dimension mismatch");
  const auto& dcols = dst.col_indices();
  const auto& doff = dst.row_offsets();
  auto& dvals = dst.values();
  for (std::size_t i = 0; i < src.n_rows(); ++i) {
    std::size_t kd = doff[i];
    for (std::size_t k = src.row_offsets()[i]; k < src.row_offsets()[i + 1]; ++k) {
      const auto c = src.col_indices()[k];
      while (kd < doff[i + 1] && dcols[kd] < c) ++kd;
      if (kd == doff[i + 1] || dcols[kd] != c)
        throw LinalgError("add_into: entry (" + std::to_string(i) + ", " + std::to_string(c) +
                          ") missing from destination pattern");
      dvals[kd] += alpha * src.values()[k];
    }
  }
}

Vector spmv(const SparseMatrix& a, std::span<const double> x) {
  if (x.size() != a.n_cols())
    throw LinalgError("spmv: vector length " + std::to_string(x.size()) + " does not match " +
                      std::to_string(a.n_cols()) + " columns");
  Vector y(a.n_rows(), 0.0);
  const auto& off = a.row_offsets();
  const auto& cols = a.col_indices();
  const auto& vals = a.values();
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) s += vals[k] * x[cols[k]];
    y[i] = s;
  }
  return y;
}

Vector spmv_transpose(const SparseMatrix& a, std::span<const double> x) {
  if (x.size() != a.n_rows()) throw LinalgError("spmv_transpose: dimension mismatch");
  Vector y(a.n_cols(), 0.0);
  for (std::size_t i = 0; i < a.n_rows(); ++i)
    for (std::size_t k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k)
      y[a.col_indices()[k]] += a.values()[k] * x[i];
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw LinalgError("dot: length mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

BlockSystem::BlockSystem(std::vector<std::size_t> row_sizes, std::vector<std::size_t> col_sizes)
    : row_sizes_(std::move(row_sizes)),
      col_sizes_(std::move(col_sizes)),
      blocks_(row_sizes_.size() * col_sizes_.size(), nullptr) {}

void BlockSystem::set_block(std::size_t i, std::size_t j, const SparseMatrix* block) {
  if (i >= row_sizes_.size() || j >= col_sizes_.size()) throw LinalgError("BlockSystem: block index out of range");
  blocks_[i * col_sizes_.size() + j] = block;
}

const SparseMatrix* BlockSystem::block(std::size_t i, std::size_t j) const {
  return blocks_.at(i * col_sizes_.size() + j);
}

std::pair<SparseMatrix, Vector> assemble_block(const BlockSystem& system) {
  const auto& rs = system.row_sizes();
  const auto& cs = system.col_sizes();
  std::vector<std::size_t> row_start(rs.size() + 1, 0), col_start(cs.size() + 1, 0);
  std::partial_sum(rs.begin(), rs.end(), row_start.begin() + 1);
  std::partial_sum(cs.begin(), cs.end(), col_start.begin() + 1);
  const std::size_t n_rows = row_start.back();
  const std::size_t n_cols = col_start.back();

  for (std::size_t bi = 0; bi < rs.size(); ++bi) {
    for (std::size_t bj = 0; bj < cs.size(); ++bj) {
      const auto* b = system.block(bi, bj);
      if (b && (b->n_rows() != rs[bi] || b->n_cols() != cs[bj])) {
        std::ostringstream msg;
        msg << "assemble_block: block (" << bi << ", " << bj << ") is " << b->n_rows() << "x" << b->n_cols()
            << ", expected " << rs[bi] << "x" << cs[bj];
        throw LinalgError(msg.str());
      }
    }
  }

  std::vector<std::size_t> offsets(n_rows + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  for (std::size_t bi = 0; bi < rs.size(); ++bi) {
    for (std::size_t local = 0; local < rs[bi]; ++local) {
      const std::size_t row = row_start[bi] + local;
      // Blocks are visited left to right, so columns stay sorted.
      for (std::size_t bj = 0; bj < cs.size(); ++bj) {
        const auto* b = system.block(bi, bj);
        if (!b) continue;
        for (std::size_t k = b->row_offsets()[local]; k < b->row_offsets()[local + 1]; ++k) {
          cols.push_back(col_start[bj] + b->col_indices()[k]);
          vals.push_back(b->values()[k]);
        }
      }
      offsets[row + 1] = cols.size();
    }
  }
  Vector rhs = system.rhs;
  if (rhs.empty()) rhs.assign(n_rows, 0.0);
  if (rhs.size() != n_rows) throw LinalgError("assemble_block: rhs length does not match block rows");
  return {SparseMatrix(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals)), std::move(rhs)};
}

// --- sparse LU ---------------------------------------------------------------

namespace {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

EigenSparse to_eigen(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(a.nnz());
  for (std::size_t i = 0; i < a.n_rows(); ++i)
    for (std::size_t k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k)
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(a.col_indices()[k]), a.values()[k]);
  EigenSparse m(static_cast<int>(a.n_rows()), static_cast<int>(a.n_cols()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

std::ptrdiff_t trailing_index(const std::string& message) {
  auto pos = message.find_last_of("0123456789");
  if (pos == std::string::npos) return -1;
  auto start = message.find_last_not_of("0123456789", pos);
  start = start == std::string::npos ? 0 : start + 1;
  return std::stol(message.substr(start, pos - start + 1));
}

}  // namespace

struct SparseLu::Impl {
  Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>> lu;
  std::vector<std::size_t> pattern_offsets;
  std::vector<std::size_t> pattern_cols;
  std::size_t n = 0;
};

SparseLu::SparseLu() : impl_(std::make_unique<Impl>()) {}
SparseLu::SparseLu(const SparseMatrix& a) : SparseLu() { factorize(a); }
SparseLu::~SparseLu() = default;
SparseLu::SparseLu(SparseLu&&) noexcept = default;
SparseLu& SparseLu::operator=(SparseLu&&) noexcept = default;

std::size_t SparseLu::size() const noexcept { return impl_->n; }

void SparseLu::factorize(const SparseMatrix& a) {
  if (a.n_rows() != a.n_cols()) throw LinalgError("solve_sparse_lu: matrix must be square");
  auto m = to_eigen(a);
  const bool same_pattern = impl_->n == a.n_rows() && impl_->pattern_offsets == a.row_offsets() &&
                            impl_->pattern_cols == a.col_indices();
  if (!same_pattern) {
    impl_->lu.analyzePattern(m);
    impl_->pattern_offsets = a.row_offsets();
    impl_->pattern_cols = a.col_indices();
    impl_->n = a.n_rows();
  }
  impl_->lu.factorize(m);
  if (impl_->lu.info() != Eigen::Success) {
    const std::string msg = impl_->lu.lastErrorMessage();
    impl_->n = 0;
    impl_->pattern_offsets.clear();
    throw SingularMatrixError("sparse LU failed: " + msg, trailing_index(msg));
  }
}

Vector SparseLu::solve(std::span<const double> b) const {
  if (b.size() != impl_->n) throw LinalgError("SparseLu::solve: rhs length mismatch or no factorization");
  Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::VectorXd x = impl_->lu.solve(rhs);
  return Vector(x.data(), x.data() + x.size());
}

Vector solve_sparse_lu(const SparseMatrix& a, std::span<const double> b) {
  if (b.size() != a.n_rows()) throw LinalgError("solve_sparse_lu: rhs length mismatch");
  SparseLu lu(a);
  return lu.solve(b);
}

// --- GMRES -------------------------------------------------------------------

GmresResult solve_gmres(const SparseMatrix& a, std::span<const double> b, const GmresOptions& options,
                        const Preconditioner& preconditioner) {
  if (a.n_rows() != a.n_cols()) throw LinalgError("solve_gmres: matrix must be square");
  if (b.size() != a.n_rows()) throw LinalgError("solve_gmres: rhs length mismatch");
  const std::size_t n = b.size();
  const std::size_t m = std::max<std::size_t>(1, std::min(options.restart, n));
  const double b_norm = norm2(b);
  GmresResult result;
  result.x.assign(n, 0.0);
  if (b_norm == 0.0) return result;

  auto precond = [&](std::span<const double> v) { return preconditioner ? preconditioner(v) : Vector(v.begin(), v.end()); };

  std::vector<Vector> basis(m + 1, Vector(n));
  std::vector<Vector> hess(m + 1, Vector(m, 0.0));
  Vector cs(m), sn(m), g(m + 1);

  std::size_t iterations = 0;
  double rel = 1.0;
  while (true) {
    auto ax = spmv(a, result.x);
    Vector r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
    double beta = norm2(r);
    rel = beta / b_norm;
    if (rel <= options.tol) break;
    if (iterations >= options.max_iter) break;
    for (std::size_t i = 0; i < n; ++i) basis[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    std::size_t k = 0;
    for (; k < m && iterations < options.max_iter; ++k) {
      ++iterations;
      auto w = spmv(a, precond(basis[k]));
      for (std::size_t j = 0; j <= k; ++j) {  // modified Gram-Schmidt
        hess[j][k] = dot(w, basis[j]);
        for (std::size_t i = 0; i < n; ++i) w[i] -= hess[j][k] * basis[j][i];
      }
      hess[k + 1][k] = norm2(w);
      if (hess[k + 1][k] != 0.0)
        for (std::size_t i = 0; i < n; ++i) basis[k + 1][i] = w[i] / hess[k + 1][k];
      for (std::size_t j = 0; j < k; ++j) {
        const double t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
        hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
        hess[j][k] = t;
      }
      const double denom = std::hypot(hess[k][k], hess[k + 1][k]);
      cs[k] = hess[k][k] / denom;
      sn[k] = hess[k + 1][k] / denom;
      hess[k][k] = denom;
      hess[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) / b_norm <= options.tol) {
        ++k;
        break;
      }
    }
    Vector y(k, 0.0);
    for (std::size_t ii = k; ii-- > 0;) {
      double s = g[ii];
      for (std::size_t j = ii + 1; j < k; ++j) s -= hess[ii][j] * y[j];
      y[ii] = s / hess[ii][ii];
    }
    Vector update(n, 0.0);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) update[i] += y[j] * basis[j][i];
    auto z = precond(update);
    for (std::size_t i = 0; i < n; ++i) result.x[i] += z[i];
  }
  result.iterations = iterations;
  result.relative_residual = rel;
  if (rel > options.tol) {
    std::ostringstream msg;
    msg << "GMRES did not converge in " << iterations << " iterations (relative residual " << rel << ")";
    throw ConvergenceError(msg.str(), rel);
  }
  return result;
}

Ilu0::Ilu0(const SparseMatrix& a) : lu_(a), diag_(a.n_rows()) {
  const auto& off = lu_.row_offsets();
  const auto& cols = lu_.col_indices();
  auto& vals = lu_.values();
  for (std::size_t i = 0; i < a.n_rows(); ++i) {
    auto d = lu_.find(i, i);
    if (!d) throw SingularMatrixError("ILU(0): missing diagonal entry", static_cast<std::ptrdiff_t>(i));
    diag_[i] = *d;
  }
  for (std::size_t i = 1; i < a.n_rows(); ++i) {
    for (std::size_t k = off[i]; k < off[i + 1] && cols[k] < i; ++k) {
      const std::size_t p = cols[k];
      if (vals[diag_[p]] == 0.0) throw SingularMatrixError("ILU(0): zero pivot", static_cast<std::ptrdiff_t>(p));
      vals[k] /= vals[diag_[p]];
      std::size_t kp = diag_[p] + 1;
      for (std::size_t j = k + 1; j < off[i + 1]; ++j) {
        while (kp < off[p + 1] && cols[kp] < cols[j]) ++kp;
        if (kp < off[p + 1] && cols[kp] == cols[j]) vals[j] -= vals[k] * vals[kp];
      }
    }
  }
}

Vector Ilu0::apply(std::span<const double> r) const {
  const auto& off = lu_.row_offsets();
  const auto& cols = lu_.col_indices();
  const auto& vals = lu_.values();
  const std::size_t n = r.size();
  Vector z(r.begin(), r.end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = off[i]; k < diag_[i]; ++k) z[i] -= vals[k] * z[cols[k]];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = diag_[i] + 1; k < off[i + 1]; ++k) z[i] -= vals[k] * z[cols[k]];
    z[i] /= vals[diag_[i]];
  }
  return z;
}

}  // namespace savflow::linalg
