#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace savflow::linalg {

using Vector = std::vector<double>;

class LinalgError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when LU factorization meets a zero pivot.
class SingularMatrixError : public LinalgError {
public:
  SingularMatrixError(const std::string& what, std::ptrdiff_t pivot)
      : LinalgError(what), pivot_(pivot) {}
  std::ptrdiff_t pivot() const noexcept { return pivot_; }

private:
  std::ptrdiff_t pivot_;
};

/// Raised when an iterative solve exhausts its iteration budget.
class ConvergenceError : public LinalgError {
public:
  ConvergenceError(const std::string& what, double residual)
      : LinalgError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row. Immutable in structure once built; values may be
/// modified in place through `values()`.
class SparseMatrix {
public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices, std::vector<double> values);

  static SparseMatrix identity(std::size_t n);
  static SparseMatrix zero(std::size_t n_rows, std::size_t n_cols);

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_cols() const noexcept { return n_cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
  const std::vector<std::size_t>& col_indices() const noexcept { return col_indices_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  /// Entry (i, j), zero when not stored.
  double at(std::size_t i, std::size_t j) const;
  /// Position of (i, j) in the value array, if stored.
  std::optional<std::size_t> find(std::size_t i, std::size_t j) const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double alpha) const;

  /// Dense row-major copy; for tests and small oracles.
  std::vector<double> to_dense() const;

  /// Checks the CSR invariants, throwing LinalgError on violation.
  void validate() const;

private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

/// Triplet accumulator; duplicates are summed on finalization.
class CooBuilder {
public:
  CooBuilder(std::size_t n_rows, std::size_t n_cols) : n_rows_(n_rows), n_cols_(n_cols) {}

  void add(std::size_t row, std::size_t col, double value);
  void reserve(std::size_t n) { triplets_.reserve(n); }
  std::size_t size() const noexcept { return triplets_.size(); }

  /// Keeps explicit zeros so that a pattern can be reused across steps.
  SparseMatrix finalize() const;

private:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };
  std::size_t n_rows_;
  std::size_t n_cols_;
  std::vector<Triplet> triplets_;
};

/// Sum alpha*A + beta*B over the union pattern.
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0, double beta = 1.0);

/// Adds alpha*src into dst; the pattern of src must be contained in dst.
void add_into(SparseMatrix& dst, const SparseMatrix& src, double alpha = 1.0);

Vector spmv(const SparseMatrix& a, std::span<const double> x);
/// y = A^T x
Vector spmv_transpose(const SparseMatrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

/// Grid of optional blocks. `block(i, j) == nullptr` means an empty block.
class BlockSystem {
public:
  BlockSystem(std::vector<std::size_t> row_sizes, std::vector<std::size_t> col_sizes);

  void set_block(std::size_t i, std::size_t j, const SparseMatrix* block);
  const SparseMatrix* block(std::size_t i, std::size_t j) const;

  const std::vector<std::size_t>& row_sizes() const noexcept { return row_sizes_; }
  const std::vector<std::size_t>& col_sizes() const noexcept { return col_sizes_; }

  Vector rhs;

private:
  std::vector<std::size_t> row_sizes_;
  std::vector<std::size_t> col_sizes_;
  std::vector<const SparseMatrix*> blocks_;
};

/// Monolithic CSR with blocks at cumulative offsets, and the rhs (zero
/// filled when the system carries none).
std::pair<SparseMatrix, Vector> assemble_block(const BlockSystem& system);

/// Sparse LU with partial pivoting and a column approximate-minimum-degree
/// ordering. The symbolic analysis can be reused for matrices that share a
/// sparsity pattern.
class SparseLu {
public:
  SparseLu();
  explicit SparseLu(const SparseMatrix& a);
  ~SparseLu();
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;

  /// Analyzes the pattern on first use or when it changed, then factorizes.
  void factorize(const SparseMatrix& a);
  Vector solve(std::span<const double> b) const;
  std::size_t size() const noexcept;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Vector solve_sparse_lu(const SparseMatrix& a, std::span<const double> b);

using Preconditioner = std::function<Vector(std::span<const double>)>;

struct GmresOptions {
  double tol = 1e-10;
  std::size_t max_iter = 1000;
  std::size_t restart = 50;
};

struct GmresResult {
  Vector x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
};

/// Right-preconditioned restarted GMRES. Throws ConvergenceError carrying the
/// final relative residual when `max_iter` is exhausted.
GmresResult solve_gmres(const SparseMatrix& a, std::span<const double> b, const GmresOptions& options = {},
                        const Preconditioner& preconditioner = {});

/// Incomplete LU with zero fill on the pattern of A.
class Ilu0 {
public:
  explicit Ilu0(const SparseMatrix& a);
  Vector apply(std::span<const double> r) const;

private:
  SparseMatrix lu_;
  std::vector<std::size_t> diag_;
};

}  // namespace savflow::linalg
