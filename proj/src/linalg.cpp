#include "cdo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cdo {

void SparseSym::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = offs[i]; k < offs[i + 1]; ++k) s += vals[k] * x[cols[k]];
    y[i] = s;
  }
}

std::vector<double> SparseSym::multiply(const std::vector<double>& x) const {
  std::vector<double> y(n);
  multiply(x, y);
  return y;
}

std::vector<double> SparseSym::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = offs[i]; k < offs[i + 1]; ++k)
      if (cols[k] == i) d[i] = vals[k];
  return d;
}

double SparseSym::entry(int i, int j) const {
  for (int k = offs[i]; k < offs[i + 1]; ++k)
    if (cols[k] == j) return vals[k];
  return 0.0;
}

double SparseSym::symmetry_deviation() const {
  double dev = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = offs[i]; k < offs[i + 1]; ++k)
      dev = std::max(dev, std::abs(vals[k] - entry(cols[k], i)));
  return dev;
}

SparseSym SparseBuilder::build() const {
  SparseSym m;
  m.n = n_;
  m.offs.assign(n_ + 1, 0);
  // Column order is sorted; duplicates are accumulated in insertion order to
  // keep the result independent of any later reordering.
  for (int i = 0; i < n_; ++i) {
    std::vector<int> cols;
    cols.reserve(rows_[i].size());
    for (auto& [j, v] : rows_[i]) cols.push_back(j);
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    std::map<int, int> pos;
    int base = static_cast<int>(m.cols.size());
    for (size_t k = 0; k < cols.size(); ++k) {
      pos[cols[k]] = base + static_cast<int>(k);
      m.cols.push_back(cols[k]);
      m.vals.push_back(0.0);
    }
    for (auto& [j, v] : rows_[i]) m.vals[pos[j]] += v;
    m.offs[i + 1] = static_cast<int>(m.cols.size());
  }
  return m;
}

namespace {

double dot_v(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

CgStats cg_solve_op(const std::function<void(std::span<const double>, std::span<double>)>& apply_A,
                    std::span<const double> b, std::span<double> x, double tol, int max_iter,
                    std::span<const double> inv_diag) {
  const int n = static_cast<int>(b.size());
  CgStats stats;
  std::vector<double> r(n), z(n), p(n), Ap(n);

  apply_A(x, Ap);
  for (int i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
  const double bnorm = std::sqrt(dot_v(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    stats.residual_history.push_back(0.0);
    return stats;
  }

  auto precondition = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (inv_diag.empty())
      out = in;
    else
      for (int i = 0; i < n; ++i) out[i] = inv_diag[i] * in[i];
  };

  precondition(r, z);
  p = z;
  double rz = dot_v(r, z);
  double rel = std::sqrt(dot_v(r, r)) / bnorm;
  stats.residual_history.push_back(rel);

  while (rel > tol) {
    if (stats.iterations >= max_iter)
      throw SolverFailure("cg: no convergence within max_iter", stats.residual_history);
    apply_A(p, Ap);
    const double pAp = dot_v(p, Ap);
    if (pAp <= 0.0)
      throw SolverFailure("cg: operator not SPD (p'Ap <= 0)", stats.residual_history);
    const double alpha = rz / pAp;
    for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (int i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
    precondition(r, z);
    const double rz_new = dot_v(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++stats.iterations;
    rel = std::sqrt(dot_v(r, r)) / bnorm;
    stats.residual_history.push_back(rel);
  }
  stats.final_residual = rel;
  return stats;
}

CgStats cg_solve(const SparseSym& A, std::span<const double> b, std::span<double> x, double tol,
                 int max_iter, Preconditioner precond) {
  std::vector<double> inv_diag;
  if (precond == Preconditioner::jacobi) {
    inv_diag = A.diagonal();
    for (double& d : inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;
  }
  return cg_solve_op([&A](std::span<const double> in, std::span<double> out) { A.multiply(in, out); },
                     b, x, tol, max_iter, inv_diag);
}

std::vector<double> DenseSym::multiply(const std::vector<double>& x) const {
  std::vector<double> y(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double DenseSym::trace() const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) s += (*this)(i, i);
  return s;
}

EigenDecomposition dense_sym_eig(const DenseSym& m) {
  const int n = m.size();
  // Work on a full copy; rotations update both triangles.
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  std::vector<std::vector<double>> q(n, std::vector<double>(n, 0.0));
  double norm_m = 0.0;
  for (int i = 0; i < n; ++i) {
    q[i][i] = 1.0;
    for (int j = 0; j < n; ++j) {
      a[i][j] = m(i, j);
      norm_m += a[i][j] * a[i][j];
    }
  }
  norm_m = std::sqrt(norm_m);

  auto offdiag = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += 2.0 * a[i][j] * a[i][j];
    return std::sqrt(s);
  };

  const double target = 1e-13 * std::max(norm_m, 1e-300);
  int sweeps = 0;
  while (offdiag() > target) {
    if (++sweeps > 100) throw NumericalFailure("dense_sym_eig: no convergence in 100 sweeps");
    for (int p = 0; p < n; ++p)
      for (int r = p + 1; r < n; ++r) {
        if (a[p][r] == 0.0) continue;
        const double theta = (a[r][r] - a[p][p]) / (2.0 * a[p][r]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akr = a[k][r];
          a[k][p] = c * akp - s * akr;
          a[k][r] = s * akp + c * akr;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], ark = a[r][k];
          a[p][k] = c * apk - s * ark;
          a[r][k] = s * apk + c * ark;
        }
        for (int k = 0; k < n; ++k) {
          const double qkp = q[k][p], qkr = q[k][r];
          q[k][p] = c * qkp - s * qkr;
          q[k][r] = s * qkp + c * qkr;
        }
      }
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] < a[j][j]; });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.basis.resize(n, std::vector<double>(n));
  for (int k = 0; k < n; ++k) {
    out.eigenvalues[k] = a[order[k]][order[k]];
    for (int i = 0; i < n; ++i) out.basis[k][i] = q[i][order[k]];
  }
  return out;
}

std::vector<double> dense_solve_spd(const DenseSym& m, const std::vector<double>& b) {
  const int n = m.size();
  std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        if (s <= 0.0) throw SolverFailure("dense_solve_spd: nonpositive pivot", {});
        L[i][i] = std::sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
  std::vector<double> y(n), x(n);
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= L[i][k] * y[k];
    y[i] = s / L[i][i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= L[k][i] * x[k];
    x[i] = s / L[i][i];
  }
  return x;
}

Mat3 invert_sym3(const Mat3& m) {
  const double d = det(m);
  // condition guard: compare against the cube of the largest entry scale
  double scale = 0.0;
  for (double v : m.a) scale = std::max(scale, std::abs(v));
  if (d == 0.0 || scale * scale * scale / std::abs(d) > 1e12)
    throw NumericalFailure("invert_sym3: tensor condition beyond 1e12");
  Mat3 inv;
  inv(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / d;
  inv(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / d;
  inv(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / d;
  inv(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / d;
  inv(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / d;
  inv(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / d;
  inv(1, 0) = inv(0, 1);
  inv(2, 0) = inv(0, 2);
  inv(2, 1) = inv(1, 2);
  return inv;
}

}  // namespace cdo
