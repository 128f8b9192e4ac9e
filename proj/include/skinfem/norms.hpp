#pragma once

// Norms of finite element functions and of pointwise differences u_h - w.
// Integral norms use element quadrature (degree 2k+2 by default); the L-inf
// proxy samples dofs, quadrature points, and edge midpoints.

#include <Eigen/Dense>
#include <cmath>

#include "skinfem/assemble.hpp"
#include "skinfem/fe.hpp"

namespace skinfem {

struct NormSet {
  double linf = 0;
  double l2 = 0;
  double l1 = 0;
  double h1_semi = 0;
  double h1 = 0;
  double w11 = 0;  // ||v||_L1 + ||grad v||_L1
};

namespace detail {

// Shared walker: fn(element, ref_point, weight_or_negative)
// weight < 0 marks a pure sampling point (dof/edge-midpoint extras).
template <class Fn>
void norm_sweep(const FeSpace& sp, int quad_degree, Fn&& fn) {
  const QuadRuleTri rule = triangle_quadrature(quad_degree);
  const Mesh& m = sp.mesh();
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    const double det = orient2d(m.vertices[tr[0]], m.vertices[tr[1]],
                                m.vertices[tr[2]]);
    for (std::size_t q = 0; q < rule.points.size(); ++q)
      fn(t, rule.points[q], rule.weights[q] * det);
    // extra sampling points: element nodes and edge midpoints
    for (const Vec2& rn : reference_nodes(sp.degree())) fn(t, rn, -1.0);
    fn(t, Vec2{0.5, 0.0}, -1.0);
    fn(t, Vec2{0.5, 0.5}, -1.0);
    fn(t, Vec2{0.0, 0.5}, -1.0);
  }
}

}  // namespace detail

/// Norms of the FE function with coefficients c.
inline NormSet norms_fe(const FeSpace& sp, const Eigen::VectorXd& c,
                        int quad_degree = -1) {
  NormSet n;
  double l2 = 0, l1 = 0, h1s = 0, g1 = 0;
  const int qd = quad_degree > 0 ? quad_degree : 2 * sp.degree() + 2;
  detail::norm_sweep(sp, qd, [&](int t, const Vec2& ref, double w) {
    const double v = sp.eval(c, t, ref);
    if (w < 0) {
      n.linf = std::max(n.linf, std::abs(v));
      return;
    }
    const Vec2 g = sp.eval_grad(c, t, ref);
    n.linf = std::max(n.linf, std::abs(v));
    l2 += w * v * v;
    l1 += w * std::abs(v);
    h1s += w * g.squared_norm();
    g1 += w * g.norm();
  });
  n.l2 = std::sqrt(l2);
  n.l1 = l1;
  n.h1_semi = std::sqrt(h1s);
  n.h1 = std::sqrt(l2 + h1s);
  n.w11 = l1 + g1;
  return n;
}

/// Norms of u_h - w at time t, with w given analytically.
inline NormSet norms_error(const FeSpace& sp, const Eigen::VectorXd& c,
                           const ScalarField& w, double t, int quad_degree = -1) {
  NormSet n;
  double l2 = 0, l1 = 0, h1s = 0, g1 = 0;
  const bool has_grad = static_cast<bool>(w.grad);
  const int qd = quad_degree > 0 ? quad_degree : 2 * sp.degree() + 2;
  detail::norm_sweep(sp, qd, [&](int el, const Vec2& ref, double wt) {
    const Vec2 x = sp.map_to_physical(el, ref);
    const double v = sp.eval(c, el, ref) - w.value(x, t);
    n.linf = std::max(n.linf, std::abs(v));
    if (wt < 0) return;
    l2 += wt * v * v;
    l1 += wt * std::abs(v);
    if (has_grad) {
      const Vec2 g = sp.eval_grad(c, el, ref) - w.grad(x, t);
      h1s += wt * g.squared_norm();
      g1 += wt * g.norm();
    }
  });
  n.l2 = std::sqrt(l2);
  n.l1 = l1;
  n.h1_semi = std::sqrt(h1s);
  n.h1 = std::sqrt(l2 + h1s);
  n.w11 = l1 + g1;
  return n;
}

/// L^q(Omega_h) norm of the FE function for q in {1, 2, 4} or q = inf (q <= 0).
inline double lq_norm(const FeSpace& sp, const Eigen::VectorXd& c, double q,
                      int quad_degree = -1) {
  if (q <= 0) return norms_fe(sp, c, quad_degree).linf;
  double acc = 0;
  const int qd = quad_degree > 0 ? quad_degree : 2 * sp.degree() + 4;
  detail::norm_sweep(sp, qd, [&](int t, const Vec2& ref, double w) {
    if (w < 0) return;
    acc += w * std::pow(std::abs(sp.eval(c, t, ref)), q);
  });
  return std::pow(acc, 1.0 / q);
}

}  // namespace skinfem
