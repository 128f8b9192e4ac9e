#pragma once

// Regularized delta functions (element-supported, reproducing point values of
// P^k polynomials through moments), discrete regularized Green's functions
// evolved from P_h delta, fine-mesh reference surrogates for the continuous
// Green's function, the parabolic dyadic decomposition around (x0, 0), and
// the L1-type norms of F = Gamma_h - Gamma_ref.

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "skinfem/assemble.hpp"
#include "skinfem/core.hpp"
#include "skinfem/fe.hpp"
#include "skinfem/norms.hpp"
#include "skinfem/parabolic.hpp"

namespace skinfem {

// ---------------------------------------------------------------------------
// Regularized delta: delta_bar = b * q on the anchor element K0, where b is
// the (positive, high-order vanishing) bump (l0 l1 l2)^4 in barycentric
// coordinates and q is the polynomial of degree <= k solving the moment
// system (P, delta_bar) = P(x0) for all P in P^k(K0).

struct RegularizedDelta {
  int element = -1;       // K0
  Vec2 x0;                // anchor point
  int degree = 1;         // k
  Vec2 centroid;          // of K0 (monomials are centered/scaled for conditioning)
  double scale = 1;       // h_K0
  Eigen::VectorXd q;      // coefficients in the scaled monomial basis
  // Cached element geometry so the closure is self-contained and can be
  // evaluated on any mesh (the support never changes).
  Vec2 v0, v1, v2;

  int n_poly() const { return (degree + 1) * (degree + 2) / 2; }

  static double bump(double l0, double l1, double l2) {
    const double p = l0 * l1 * l2;
    return p > 0 ? p * p * p * p : 0.0;
  }

  double monomial(int idx, const Vec2& x) const {
    // Monomials x^a y^b with a+b <= k, ordered by total degree.
    static const int ax[10] = {0, 1, 0, 2, 1, 0, 3, 2, 1, 0};
    static const int ay[10] = {0, 0, 1, 0, 1, 2, 0, 1, 2, 3};
    const double u = (x.x - centroid.x) / scale, v = (x.y - centroid.y) / scale;
    return std::pow(u, ax[idx]) * std::pow(v, ay[idx]);
  }

  /// Pointwise value; zero outside K0.
  double value(const Vec2& x) const {
    const Vec2 e1 = v1 - v0, e2 = v2 - v0;
    const double det = e1.cross(e2);
    const double l1v = (x - v0).cross(e2) / det;
    const double l2v = e1.cross(x - v0) / det;
    const double l0v = 1.0 - l1v - l2v;
    if (l0v < 0 || l1v < 0 || l2v < 0) return 0.0;
    double s = 0;
    for (int i = 0; i < n_poly(); ++i) s += q[i] * monomial(i, x);
    return bump(l0v, l1v, l2v) * s;
  }
};

/// Builds the delta anchored at the element containing x0; that element must
/// not touch the boundary.
inline RegularizedDelta build_delta(const FeSpace& sp, const Vec2& x0) {
  const Mesh& m = sp.mesh();
  const int k0 = m.locate(x0);
  if (k0 < 0) throw BoundaryElement("anchor point lies outside the mesh");
  for (int v : m.triangles[k0])
    if (m.is_boundary_vertex(v))
      throw BoundaryElement("anchor element touches the boundary");

  RegularizedDelta d;
  d.element = k0;
  d.x0 = x0;
  d.degree = sp.degree();
  const auto& tr = m.triangles[k0];
  d.v0 = m.vertices[tr[0]];
  d.v1 = m.vertices[tr[1]];
  d.v2 = m.vertices[tr[2]];
  d.centroid = (d.v0 + d.v1 + d.v2) / 3.0;
  d.scale = m.triangle_diameter(k0);

  const int np = d.n_poly();
  // Weighted Gram system G q = p(x0), G_ab = (P_a, b P_b)_{K0}; the bump is a
  // degree-12 polynomial, so a degree-18 rule integrates G exactly.
  const QuadRuleTri rule = triangle_quadrature(12 + 2 * d.degree);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(np, np);
  const double det = orient2d(d.v0, d.v1, d.v2);
  for (std::size_t qp = 0; qp < rule.points.size(); ++qp) {
    const Vec2 ref = rule.points[qp];
    const Vec2 x = d.v0 + ref.x * (d.v1 - d.v0) + ref.y * (d.v2 - d.v0);
    const double b = RegularizedDelta::bump(1.0 - ref.x - ref.y, ref.x, ref.y);
    const double w = rule.weights[qp] * det * b;
    double P[10];
    for (int i = 0; i < np; ++i) P[i] = d.monomial(i, x);
    for (int i = 0; i < np; ++i)
      for (int j = 0; j < np; ++j) G(i, j) += w * P[i] * P[j];
  }
  Eigen::VectorXd rhs(np);
  for (int i = 0; i < np; ++i) rhs[i] = d.monomial(i, x0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
  if (!lu.isInvertible() || lu.rcond() < 1e-12)
    throw SingularMoments("delta moment Gram system is ill-conditioned");
  d.q = lu.solve(rhs);
  return d;
}

/// Max |delta_bar| over the anchor element (dense sampling).
inline double delta_sup_norm(const RegularizedDelta& d) {
  double sup = 0;
  const int M = 40;
  for (int i = 0; i <= M; ++i)
    for (int j = 0; j + i <= M; ++j) {
      const double l1 = static_cast<double>(i) / M, l2 = static_cast<double>(j) / M;
      const Vec2 x = d.v0 + l1 * (d.v1 - d.v0) + l2 * (d.v2 - d.v0);
      sup = std::max(sup, std::abs(d.value(x)));
    }
  return sup;
}

/// Load vector (delta_bar, phi_i): supported on the anchor element only.
inline Eigen::VectorXd delta_load(const FeSpace& sp, const RegularizedDelta& d) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(sp.num_dofs());
  const Mesh& m = sp.mesh();
  // The anchor element lives on the delta's original mesh. On another space
  // (the fine reference), integrate over every element overlapping K0.
  const QuadRuleTri rule = triangle_quadrature(12 + 2 * d.degree + 2 * sp.degree());
  const int nd = dofs_per_element(sp.degree());
  double vals[10];
  Vec2 grads[10];
  for (int t = 0; t < m.num_triangles(); ++t) {
    // Quick reject: bounding boxes.
    const auto& tr = m.triangles[t];
    double lox = 1e300, loy = 1e300, hix = -1e300, hiy = -1e300;
    for (int v : tr) {
      lox = std::min(lox, m.vertices[v].x); hix = std::max(hix, m.vertices[v].x);
      loy = std::min(loy, m.vertices[v].y); hiy = std::max(hiy, m.vertices[v].y);
    }
    const double dlox = std::min({d.v0.x, d.v1.x, d.v2.x});
    const double dhix = std::max({d.v0.x, d.v1.x, d.v2.x});
    const double dloy = std::min({d.v0.y, d.v1.y, d.v2.y});
    const double dhiy = std::max({d.v0.y, d.v1.y, d.v2.y});
    if (hix < dlox || lox > dhix || hiy < dloy || loy > dhiy) continue;
    const double det = orient2d(m.vertices[tr[0]], m.vertices[tr[1]],
                                m.vertices[tr[2]]);
    const auto& dofs = sp.element_dofs(t);
    for (std::size_t qp = 0; qp < rule.points.size(); ++qp) {
      const Vec2 x = sp.map_to_physical(t, rule.points[qp]);
      const double dv = d.value(x);
      if (dv == 0.0) continue;
      reference_basis(sp.degree(), rule.points[qp], vals, grads);
      const double w = rule.weights[qp] * det * dv;
      for (int i = 0; i < nd; ++i) load[dofs[i]] += w * vals[i];
    }
  }
  return load;
}

/// Worst moment-condition residual |(P, delta) - P(x0)| over the scaled
/// monomial basis of P^k(K0).
inline double delta_moment_residual(const FeSpace& sp, const RegularizedDelta& d) {
  const QuadRuleTri rule = triangle_quadrature(12 + 2 * d.degree);
  const double det = orient2d(d.v0, d.v1, d.v2);
  double worst = 0;
  for (int i = 0; i < d.n_poly(); ++i) {
    double mom = 0;
    for (std::size_t qp = 0; qp < rule.points.size(); ++qp) {
      const Vec2 ref = rule.points[qp];
      const Vec2 x = d.v0 + ref.x * (d.v1 - d.v0) + ref.y * (d.v2 - d.v0);
      mom += rule.weights[qp] * det * d.value(x) * d.monomial(i, x);
    }
    worst = std::max(worst, std::abs(mom - d.monomial(i, d.x0)));
  }
  (void)sp;
  return worst;
}

struct DeltaProjection {
  Eigen::VectorXd coefs;   // P_h delta_bar
  double decay_slope = 0;  // envelope fit of log|coef| vs |x - x0| / h
  int decay_bins = 0;
};

/// P_h delta_bar plus the radial envelope decay fit over dofs with
/// |x - x0| >= 3h (max per half-h bin, floored at 1e-13 of the peak).
inline DeltaProjection project_delta(const FeSpace& sp, const SparseMatrix& M,
                                     const RegularizedDelta& d,
                                     double h_for_fit = 0.0) {
  DeltaProjection out;
  out.coefs = solve_spd(M, delta_load(sp, d), 1e-12);
  const double h = h_for_fit > 0 ? h_for_fit : sp.mesh().h_max;
  std::map<int, double> bins;  // bin index -> max |coef|
  double peak = 0;
  for (int i = 0; i < sp.num_dofs(); ++i)
    peak = std::max(peak, std::abs(out.coefs[i]));
  for (int i = 0; i < sp.num_dofs(); ++i) {
    const double r = dist(sp.dof_coords()[i], d.x0);
    if (r < 3.0 * h) continue;
    const int bin = static_cast<int>(std::floor(2.0 * r / h));
    bins[bin] = std::max(bins[bin], std::abs(out.coefs[i]));
  }
  // Least squares of log(envelope) against r/h at bin centers.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [bin, env] : bins) {
    if (env < 1e-13 * peak) continue;
    const double x = 0.5 * (bin + 0.5);
    const double y = std::log(env);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  out.decay_bins = n;
  if (n >= 2) {
    const double den = n * sxx - sx * sx;
    out.decay_slope = (n * sxy - sx * sy) / den;
  }
  return out;
}

/// Homogeneous evolution from P_h delta (the discrete regularized Green's
/// function). Plain Crank-Nicolson satisfies the discrete energy identity
/// exactly; start_be_steps > 0 adds Rannacher start-up damping (two halved
/// backward-Euler steps each), which the F-norm studies use to keep the
/// unresolved high modes out of the time differences.
inline Trajectory evolve_green(const FeSpace& sp, const SparseMatrix& M,
                               const SparseMatrix& K,
                               const Eigen::VectorXd& ph_delta, double T,
                               double dt, int start_be_steps = 0) {
  if (T > 1.0 + 1e-12) throw ConfigError("green evolution expects T <= 1");
  const auto zero_load = [&](double) {
    return Eigen::VectorXd::Zero(sp.num_dofs());
  };
  return solve_parabolic(M, K, ph_delta, zero_load, T, dt,
                         Scheme::CrankNicolson, 1e-10, start_be_steps);
}

// ---------------------------------------------------------------------------
// Fine-mesh reference surrogate with gradient and time-derivative evaluation.

class GreenReference {
 public:
  GreenReference(std::unique_ptr<FeSpace> space, Trajectory traj)
      : space_(std::move(space)), traj_(std::move(traj)) {
    build_grid();
  }

  const FeSpace& space() const { return *space_; }
  const Trajectory& trajectory() const { return traj_; }
  int outside_evals() const { return outside_evals_; }

  /// Value and gradient at (x, t): element location on the fine mesh plus
  /// linear interpolation in time. Points beyond the fine polygon use the
  /// nearest element (extrapolation of its polynomial), counted in
  /// outside_evals().
  void eval(const Vec2& x, double t, double* value, Vec2* grad) const {
    int tri = locate_cached(x);
    const double dt = traj_.dt;
    const int nmax = traj_.steps();
    double s = t / dt;
    int n0 = std::clamp(static_cast<int>(std::floor(s)), 0, nmax - 1);
    const double w1 = std::clamp(s - n0, 0.0, 1.0);
    const Vec2 ref = space_->to_reference(tri, x);
    const double va = space_->eval(traj_.at(n0), tri, ref);
    const double vb = space_->eval(traj_.at(n0 + 1), tri, ref);
    if (value) *value = (1 - w1) * va + w1 * vb;
    if (grad) {
      const Vec2 ga = space_->eval_grad(traj_.at(n0), tri, ref);
      const Vec2 gb = space_->eval_grad(traj_.at(n0 + 1), tri, ref);
      *grad = (1 - w1) * ga + w1 * gb;
    }
  }

 private:
  void build_grid() {
    const Mesh& m = space_->mesh();
    lo_ = {1e300, 1e300};
    hi_ = {-1e300, -1e300};
    for (const Vec2& p : m.vertices) {
      lo_.x = std::min(lo_.x, p.x); lo_.y = std::min(lo_.y, p.y);
      hi_.x = std::max(hi_.x, p.x); hi_.y = std::max(hi_.y, p.y);
    }
    cell_ = std::max(m.h_max, 1e-12);
    nx_ = std::max(1, static_cast<int>((hi_.x - lo_.x) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((hi_.y - lo_.y) / cell_) + 1);
    grid_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (int t = 0; t < m.num_triangles(); ++t) {
      double lx = 1e300, ly = 1e300, hx = -1e300, hy = -1e300;
      for (int v : m.triangles[t]) {
        lx = std::min(lx, m.vertices[v].x); hx = std::max(hx, m.vertices[v].x);
        ly = std::min(ly, m.vertices[v].y); hy = std::max(hy, m.vertices[v].y);
      }
      for (int i = cx(lx); i <= cx(hx); ++i)
        for (int j = cy(ly); j <= cy(hy); ++j)
          grid_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
    }
  }

  int cx(double x) const {
    return std::clamp(static_cast<int>((x - lo_.x) / cell_), 0, nx_ - 1);
  }
  int cy(double y) const {
    return std::clamp(static_cast<int>((y - lo_.y) / cell_), 0, ny_ - 1);
  }

  int locate_cached(const Vec2& x) const {
    const Mesh& m = space_->mesh();
    const auto& cand = grid_[static_cast<std::size_t>(cy(x.y)) * nx_ + cx(x.x)];
    int best = -1;
    double best_v = -1e300;
    for (int t : cand) {
      const auto bc = m.barycentric(t, x);
      const double v = std::min({bc[0], bc[1], bc[2]});
      if (v > best_v) { best_v = v; best = t; }
      if (v >= -1e-12) return t;
    }
    if (best >= 0 && best_v > -0.25) {
      ++outside_evals_;  // just outside the fine polygon: extrapolate
      return best;
    }
    const int t = m.locate_nearest(x);
    ++outside_evals_;
    return t;
  }

  std::unique_ptr<FeSpace> space_;
  Trajectory traj_;
  Vec2 lo_, hi_;
  double cell_ = 1;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> grid_;
  mutable int outside_evals_ = 0;
};

// ---------------------------------------------------------------------------
// Parabolic dyadic decomposition: rho(x,t) = max(|x - x0|, sqrt(t));
// d_j = 2^{-j-1}; innermost when rho <= d_{J*}. Indices below zero extend the
// same law to rho > 1 (needed when diam exceeds 1).

struct DyadicDecomposition {
  Vec2 x0;
  double T = 0;
  double h = 0;
  double C_star = 1;
  int J_star = 1;

  double d(int j) const { return std::pow(2.0, -j - 1); }
  double rho(const Vec2& x, double t) const {
    return std::max((x - x0).norm(), std::sqrt(std::max(t, 0.0)));
  }
  /// Annulus index for (x,t); J_star + 1 denotes the innermost region.
  int classify(const Vec2& x, double t) const {
    const double r = rho(x, t);
    if (r <= d(J_star)) return J_star + 1;
    // unique j with d(j) <= rho < 2 d(j); ties resolve to the larger-d side
    const int j = static_cast<int>(std::ceil(-std::log2(r))) - 1;
    return std::min(j, J_star);
  }
  int innermost_index() const { return J_star + 1; }
};

inline DyadicDecomposition dyadic(const Vec2& x0, double T, double h,
                                  double C_star) {
  if (C_star < 1) throw ConfigError("dyadic needs C_star >= 1");
  DyadicDecomposition d;
  d.x0 = x0;
  d.T = T;
  d.h = h;
  d.C_star = C_star;
  // J* with C* h <= d_{J*} <= 2 C* h
  d.J_star = static_cast<int>(std::floor(-std::log2(C_star * h))) - 1;
  if (d.d(d.J_star) < C_star * h - 1e-15 || d.d(d.J_star) > 2 * C_star * h + 1e-15)
    d.J_star = static_cast<int>(std::ceil(-std::log2(2.0 * C_star * h))) - 1;
  if (d.J_star < 1)
    throw DegenerateDecomposition("J* < 1; h too coarse for C* = " +
                                  std::to_string(C_star));
  return d;
}

// ---------------------------------------------------------------------------
// Norms of F = Gamma_h - Gamma_ref over the coarse space-time grid.

struct FNorms {
  double f_l1w11 = 0;   // ||F||_{L1(0,T; W^{1,1})}
  double ft_l1 = 0;     // ||F_t||_{L1(Q)}
  double f_l2h1 = 0;    // ||F||_{L2(0,T; H1)} (energy-scale diagnostic)
  // per-annulus tallies: d_j^{N/2+1} * ||F||_{1,Q_hj} with N = 2,
  // keyed by annulus index (J*+1 = innermost)
  std::map<int, double> annulus_tally;
  std::map<int, double> annulus_measure;  // space-time measure bookkeeping
};

/// Space integrals by coarse element quadrature, time by the trapezoid rule
/// on the coarse grid; F_t by centered differences (one-sided at the ends).
inline FNorms f_norms(const FeSpace& sp, const Trajectory& coarse,
                      const GreenReference& ref, const DyadicDecomposition& dec,
                      int quad_degree = -1) {
  FNorms out;
  const Mesh& m = sp.mesh();
  const int qd = quad_degree > 0 ? quad_degree : 2 * sp.degree() + 2;
  const QuadRuleTri rule = triangle_quadrature(qd);
  const int N = coarse.steps();
  const double dt = coarse.dt;

  // Per-annulus squared accumulators for |||F|||_{1,Q_hj}.
  std::map<int, double> sq;

  for (int n = 0; n <= N; ++n) {
    const double t = coarse.times[n];
    const double tw = (n == 0 || n == N) ? 0.5 * dt : dt;  // trapezoid
    double w11 = 0, ft_l1 = 0, h1sq = 0;
    for (int e = 0; e < m.num_triangles(); ++e) {
      const auto& tr = m.triangles[e];
      const double det = orient2d(m.vertices[tr[0]], m.vertices[tr[1]],
                                  m.vertices[tr[2]]);
      for (std::size_t qp = 0; qp < rule.points.size(); ++qp) {
        const Vec2 ref_pt = rule.points[qp];
        const Vec2 x = sp.map_to_physical(e, ref_pt);
        const double w = rule.weights[qp] * det;

        double rv;
        Vec2 rg;
        ref.eval(x, t, &rv, &rg);
        const double F = sp.eval(coarse.at(n), e, ref_pt) - rv;
        const Vec2 dF = sp.eval_grad(coarse.at(n), e, ref_pt) - rg;

        // centered time difference of F at this point
        const int na = (n == 0) ? 0 : n - 1;
        const int nb = (n == N) ? N : n + 1;
        double rva, rvb;
        ref.eval(x, coarse.times[na], &rva, nullptr);
        ref.eval(x, coarse.times[nb], &rvb, nullptr);
        const double Fa = sp.eval(coarse.at(na), e, ref_pt) - rva;
        const double Fb = sp.eval(coarse.at(nb), e, ref_pt) - rvb;
        const double Ft = (Fb - Fa) / ((nb - na) * dt);

        w11 += w * (std::abs(F) + dF.norm());
        ft_l1 += w * std::abs(Ft);
        h1sq += w * (F * F + dF.squared_norm());

        const int j = dec.classify(x, t);
        sq[j] += tw * w * (F * F + dF.squared_norm());
        out.annulus_measure[j] += tw * w;
      }
    }
    out.f_l1w11 += tw * w11;
    out.ft_l1 += tw * ft_l1;
    out.f_l2h1 += tw * h1sq;
  }
  out.f_l2h1 = std::sqrt(out.f_l2h1);
  for (const auto& [j, s] : sq) {
    const double dj = (j == dec.innermost_index()) ? dec.d(dec.J_star) : dec.d(j);
    out.annulus_tally[j] = std::pow(dj, 2.0) * std::sqrt(s);  // N/2 + 1 = 2
  }
  return out;
}

}  // namespace skinfem
