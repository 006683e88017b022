// Minimal deterministic numerical kernel: compressed sparse rows, conjugate
// gradients with optional Jacobi preconditioning, cyclic-Jacobi symmetric
// eigendecomposition, and small dense Cholesky solves.
//
// Accumulation order is fixed left-to-right everywhere so repeated runs are
// bitwise identical.

#ifndef CDO_LINALG_HPP
#define CDO_LINALG_HPP

#include <span>
#include <vector>

#include "cdo/core.hpp"

namespace cdo {

/// Sparse symmetric matrix in CSR layout (full pattern stored, columns
/// sorted per row).
struct SparseSym {
  int n = 0;
  std::vector<int> offs;  // size n+1
  std::vector<int> cols;
  std::vector<double> vals;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(const std::vector<double>& x) const;
  std::vector<double> diagonal() const;
  /// max |A(i,j) - A(j,i)| over the stored pattern.
  double symmetry_deviation() const;
  double entry(int i, int j) const;
};

/// Accumulates (i,j,v) contributions and emits a SparseSym. Duplicate
/// entries are summed in insertion order.
class SparseBuilder {
 public:
  explicit SparseBuilder(int n) : n_(n), rows_(n) {}
  void add(int i, int j, double v) { rows_[i].push_back({j, v}); }
  void add_sym(int i, int j, double v) {
    add(i, j, v);
    if (i != j) add(j, i, v);
  }
  SparseSym build() const;

 private:
  int n_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
};

enum class Preconditioner { none, jacobi };

struct CgStats {
  int iterations = 0;
  double final_residual = 0.0;  // relative
  std::vector<double> residual_history;
};

/// Matrix-free CG on a caller-supplied SPD operator.
CgStats cg_solve_op(const std::function<void(std::span<const double>, std::span<double>)>& apply_A,
                    std::span<const double> b, std::span<double> x, double tol, int max_iter,
                    std::span<const double> inv_diag = {});

CgStats cg_solve(const SparseSym& A, std::span<const double> b, std::span<double> x, double tol,
                 int max_iter, Preconditioner precond = Preconditioner::jacobi);

/// Dense symmetric matrix, packed lower triangle.
class DenseSym {
 public:
  DenseSym() = default;
  explicit DenseSym(int n) : n_(n), a_(static_cast<size_t>(n) * (n + 1) / 2, 0.0) {}

  int size() const { return n_; }
  double& at(int i, int j) { return a_[idx(i, j)]; }
  double operator()(int i, int j) const { return a_[idx(i, j)]; }

  std::vector<double> multiply(const std::vector<double>& x) const;
  double trace() const;

 private:
  static size_t idx(int i, int j) {
    if (i < j) std::swap(i, j);
    return static_cast<size_t>(i) * (i + 1) / 2 + j;
  }
  int n_ = 0;
  std::vector<double> a_;
};

struct EigenDecomposition {
  std::vector<double> eigenvalues;        // ascending
  std::vector<std::vector<double>> basis; // basis[k] = eigenvector of eigenvalues[k]
};

/// Cyclic Jacobi rotations; converges to off-diagonal Frobenius norm
/// <= 1e-13 * ||M||.
EigenDecomposition dense_sym_eig(const DenseSym& m);

/// Cholesky factorization + triangular solves. Throws on nonpositive pivot.
std::vector<double> dense_solve_spd(const DenseSym& m, const std::vector<double>& b);

/// Symmetric 3x3 inverse through the adjugate, guarded against conditioning
/// beyond 1e12.
Mat3 invert_sym3(const Mat3& m);

}  // namespace cdo

#endif
