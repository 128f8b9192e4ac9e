#pragma once

// Assembly of the mass matrix (u,v), the form a(u,v) = (grad u, grad v) +
// (u,v), domain and boundary load vectors, the L2 projection P_h, and nodal
// interpolation I_h. Element matrices use quadrature exact to degree 2k;
// loads and error norms use 2k+2 by default.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "skinfem/core.hpp"
#include "skinfem/fe.hpp"
#include "skinfem/quadrature.hpp"
#include "skinfem/sparse.hpp"

namespace skinfem {

/// Scalar field with an optional gradient, possibly time dependent.
struct ScalarField {
  std::function<double(const Vec2&, double)> value;
  std::function<Vec2(const Vec2&, double)> grad;  // may be empty

  static ScalarField constant(double c) {
    return {[c](const Vec2&, double) { return c; },
            [](const Vec2&, double) { return Vec2{0, 0}; }};
  }
  static ScalarField spatial(std::function<double(const Vec2&)> f) {
    return {[f = std::move(f)](const Vec2& x, double) { return f(x); }, {}};
  }
};

namespace detail {

template <class Kernel>
SparseMatrix assemble_matrix(const FeSpace& sp, Kernel&& element_kernel) {
  const Mesh& m = sp.mesh();
  std::vector<std::vector<int>> cells(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) cells[t] = sp.element_dofs(t);
  CsrBuilder builder(sp.num_dofs(), cells);
  const int nd = dofs_per_element(sp.degree());
  std::vector<double> local(nd * nd);
  for (int t = 0; t < m.num_triangles(); ++t) {
    std::fill(local.begin(), local.end(), 0.0);
    element_kernel(t, local.data());
    const auto& dofs = sp.element_dofs(t);
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j)
        builder.add(dofs[i], dofs[j], local[i * nd + j]);
  }
  return builder.take();
}

}  // namespace detail

/// (u, v)_{Omega_h}
inline SparseMatrix assemble_mass(const FeSpace& sp) {
  const int k = sp.degree();
  const int nd = dofs_per_element(k);
  const QuadRuleTri rule = triangle_quadrature(2 * k);
  return detail::assemble_matrix(sp, [&](int t, double* local) {
    double vals[10];
    Vec2 grads[10];
    const auto& tr = sp.mesh().triangles[t];
    const double det = orient2d(sp.mesh().vertices[tr[0]], sp.mesh().vertices[tr[1]],
                                sp.mesh().vertices[tr[2]]);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      reference_basis(k, rule.points[q], vals, grads);
      const double w = rule.weights[q] * det;
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j) local[i * nd + j] += w * vals[i] * vals[j];
    }
  });
}

/// a(u, v) = (grad u, grad v)_{Omega_h} + (u, v)_{Omega_h}
inline SparseMatrix assemble_form(const FeSpace& sp) {
  const int k = sp.degree();
  const int nd = dofs_per_element(k);
  const QuadRuleTri rule = triangle_quadrature(2 * k);
  return detail::assemble_matrix(sp, [&](int t, double* local) {
    double vals[10];
    Vec2 grads[10], pg[10];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      reference_basis(k, rule.points[q], vals, grads);
      const double det = sp.physical_gradients(t, grads, nd, pg);
      const double w = rule.weights[q] * det;
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j)
          local[i * nd + j] += w * (pg[i].dot(pg[j]) + vals[i] * vals[j]);
    }
  });
}

/// (f(t), v)_{Omega_h}
inline Eigen::VectorXd assemble_domain_load(const FeSpace& sp, const ScalarField& f,
                                            double t, int quad_degree = -1) {
  const int k = sp.degree();
  const int nd = dofs_per_element(k);
  const QuadRuleTri rule =
      triangle_quadrature(quad_degree > 0 ? quad_degree : 2 * k + 2);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(sp.num_dofs());
  double vals[10];
  Vec2 grads[10];
  for (int e = 0; e < sp.mesh().num_triangles(); ++e) {
    const auto& tr = sp.mesh().triangles[e];
    const double det = orient2d(sp.mesh().vertices[tr[0]], sp.mesh().vertices[tr[1]],
                                sp.mesh().vertices[tr[2]]);
    const auto& dofs = sp.element_dofs(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      reference_basis(k, rule.points[q], vals, grads);
      const Vec2 x = sp.map_to_physical(e, rule.points[q]);
      const double w = rule.weights[q] * det * f.value(x, t);
      for (int i = 0; i < nd; ++i) load[dofs[i]] += w * vals[i];
    }
  }
  return load;
}

/// (g(t), v)_{boundary of Omega_h}; integrates over the polygon edges.
inline Eigen::VectorXd assemble_boundary_load(const FeSpace& sp,
                                              const ScalarField& g, double t,
                                              int quad_degree = -1) {
  const int k = sp.degree();
  const int nd = dofs_per_element(k);
  const QuadRule1D rule = edge_quadrature(quad_degree > 0 ? quad_degree : 2 * k + 2);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(sp.num_dofs());
  double vals[10];
  Vec2 grads[10];
  const Mesh& m = sp.mesh();
  for (std::size_t be = 0; be < m.boundary_edges.size(); ++be) {
    const BoundaryEdge& e = m.boundary_edges[be];
    const Vec2 A = m.vertices[e.a], B = m.vertices[e.b];
    const double len = dist(A, B);
    const auto& dofs = sp.element_dofs(e.tri);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = rule.points[q];
      const Vec2 x = A + s * (B - A);
      const Vec2 ref = sp.to_reference(e.tri, x);
      reference_basis(k, ref, vals, grads);
      const double w = rule.weights[q] * len * g.value(x, t);
      for (int i = 0; i < nd; ++i) load[dofs[i]] += w * vals[i];
    }
  }
  return load;
}

/// a(w, v) = (grad w, grad v) + (w, v) against every basis function, for an
/// analytic w with gradient.
inline Eigen::VectorXd assemble_form_load(const FeSpace& sp, const ScalarField& w,
                                          double t, int quad_degree = -1) {
  const int k = sp.degree();
  const int nd = dofs_per_element(k);
  const QuadRuleTri rule =
      triangle_quadrature(quad_degree > 0 ? quad_degree : 2 * k + 2);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(sp.num_dofs());
  double vals[10];
  Vec2 grads[10], pg[10];
  for (int e = 0; e < sp.mesh().num_triangles(); ++e) {
    const auto& dofs = sp.element_dofs(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      reference_basis(k, rule.points[q], vals, grads);
      const double det = sp.physical_gradients(e, grads, nd, pg);
      const Vec2 x = sp.map_to_physical(e, rule.points[q]);
      const double wv = w.value(x, t);
      const Vec2 wg = w.grad(x, t);
      const double wq = rule.weights[q] * det;
      for (int i = 0; i < nd; ++i)
        load[dofs[i]] += wq * (wg.dot(pg[i]) + wv * vals[i]);
    }
  }
  return load;
}

/// L2 projection P_h w: solves M c = (w, phi_i).
inline Eigen::VectorXd l2_project(const FeSpace& sp, const SparseMatrix& M,
                                  const ScalarField& w, double t = 0.0,
                                  int quad_degree = -1, double rtol = 1e-12) {
  return solve_spd(M, assemble_domain_load(sp, w, t, quad_degree), rtol);
}

/// Nodal interpolation I_h w.
inline Eigen::VectorXd interpolate(const FeSpace& sp, const ScalarField& w,
                                   double t = 0.0) {
  Eigen::VectorXd c(sp.num_dofs());
  for (int i = 0; i < sp.num_dofs(); ++i) c[i] = w.value(sp.dof_coords()[i], t);
  return c;
}

}  // namespace skinfem
