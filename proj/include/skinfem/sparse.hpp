#pragma once

// Compressed-row symmetric sparse matrices and a Jacobi-preconditioned
// conjugate gradient solver. Deterministic: fixed accumulation order, no
// threading.

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "skinfem/core.hpp"

namespace skinfem {

struct SparseMatrix {
  int n = 0;
  std::vector<int> row_ptr;   // size n+1
  std::vector<int> col_idx;   // size nnz
  std::vector<double> vals;   // size nnz

  void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    y.resize(n);
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        s += vals[k] * x[col_idx[k]];
      y[i] = s;
    }
  }

  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y;
    multiply(x, y);
    return y;
  }

  Eigen::VectorXd diagonal() const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        if (col_idx[k] == i) d[i] = vals[k];
    return d;
  }

  double coeff(int i, int j) const {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      if (col_idx[k] == j) return vals[k];
    return 0.0;
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        D(i, col_idx[k]) = vals[k];
    return D;
  }

  double sym_error() const {
    double e = 0, scale = 0;
    for (int i = 0; i < n; ++i)
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
        e = std::max(e, std::abs(vals[k] - coeff(col_idx[k], i)));
        scale = std::max(scale, std::abs(vals[k]));
      }
    return scale > 0 ? e / scale : 0.0;
  }

  /// this + c * other, assuming identical sparsity pattern.
  SparseMatrix plus_scaled(const SparseMatrix& other, double c) const {
    SparseMatrix r = *this;
    for (std::size_t k = 0; k < vals.size(); ++k) r.vals[k] += c * other.vals[k];
    return r;
  }

  SparseMatrix scaled(double c) const {
    SparseMatrix r = *this;
    for (auto& v : r.vals) v *= c;
    return r;
  }
};

/// Builds a CSR pattern from element connectivity, then accepts element
/// contributions; duplicate entries are accumulated in place.
class CsrBuilder {
 public:
  explicit CsrBuilder(int n, const std::vector<std::vector<int>>& cells) {
    mat_.n = n;
    std::vector<std::vector<int>> cols(n);
    for (const auto& cell : cells)
      for (int a : cell)
        for (int b : cell) cols[a].push_back(b);
    mat_.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
      auto& c = cols[i];
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
      mat_.row_ptr[i + 1] = mat_.row_ptr[i] + static_cast<int>(c.size());
    }
    mat_.col_idx.reserve(mat_.row_ptr[n]);
    for (int i = 0; i < n; ++i)
      mat_.col_idx.insert(mat_.col_idx.end(), cols[i].begin(), cols[i].end());
    mat_.vals.assign(mat_.row_ptr[n], 0.0);
  }

  void add(int i, int j, double v) {
    const auto begin = mat_.col_idx.begin() + mat_.row_ptr[i];
    const auto end = mat_.col_idx.begin() + mat_.row_ptr[i + 1];
    const auto it = std::lower_bound(begin, end, j);
    mat_.vals[it - mat_.col_idx.begin()] += v;
  }

  SparseMatrix take() { return std::move(mat_); }

 private:
  SparseMatrix mat_;
};

struct SolveStats {
  int iterations = 0;
  double residual = 0;
};

/// Jacobi-preconditioned CG for SPD systems. Stops at ||Ax-b|| <= rtol ||b||;
/// throws NoConvergence past 10n iterations.
inline Eigen::VectorXd solve_spd(const SparseMatrix& A, const Eigen::VectorXd& b,
                                 double rtol = 1e-10, SolveStats* stats = nullptr,
                                 const Eigen::VectorXd* x0 = nullptr) {
  const int n = A.n;
  const double bnorm = b.norm();
  Eigen::VectorXd x = x0 ? *x0 : Eigen::VectorXd::Zero(n);
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return Eigen::VectorXd::Zero(n);
  }
  Eigen::VectorXd invd = A.diagonal().cwiseInverse();
  Eigen::VectorXd r = b - A * x;
  Eigen::VectorXd z = invd.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const int maxit = 10 * n + 50;
  Eigen::VectorXd Ap;
  for (int it = 0; it < maxit; ++it) {
    if (r.norm() <= rtol * bnorm) {
      if (stats) *stats = {it, r.norm()};
      return x;
    }
    A.multiply(p, Ap);
    const double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    z = invd.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (r.norm() <= rtol * bnorm) {
    if (stats) *stats = {maxit, r.norm()};
    return x;
  }
  throw NoConvergence("CG stalled after " + std::to_string(maxit) +
                      " iterations, residual " + std::to_string(r.norm() / bnorm));
}

}  // namespace skinfem
