#pragma once

// Time integration of M u' + K u = F(t), the discrete operator A_h = M^-1 K,
// and exact spectral evaluation of the semigroup e^{-t A_h} through the dense
// generalized symmetric eigenproblem K v = lambda M v (desk-scale anchor).

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <functional>
#include <vector>

#include "skinfem/core.hpp"
#include "skinfem/norms.hpp"
#include "skinfem/sparse.hpp"

namespace skinfem {

enum class Scheme { BackwardEuler, CrankNicolson };

struct Trajectory {
  Scheme scheme = Scheme::CrankNicolson;
  double dt = 0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;

  const Eigen::VectorXd& at(int n) const { return states[n]; }
  int steps() const { return static_cast<int>(states.size()) - 1; }
};

/// One implicit step. backward-euler: (M + dt K) u1 = M u0 + dt F(t0+dt);
/// crank-nicolson: (M + dt/2 K) u1 = (M - dt/2 K) u0 + dt/2 (F(t0) + F(t0+dt)).
inline Eigen::VectorXd step(const SparseMatrix& M, const SparseMatrix& K,
                            const Eigen::VectorXd& u0, double dt,
                            const std::function<Eigen::VectorXd(double)>& load,
                            double t0, Scheme scheme, double rtol = 1e-10) {
  if (!(dt > 0)) throw ConfigError("step needs dt > 0");
  if (scheme == Scheme::BackwardEuler) {
    const SparseMatrix A = M.plus_scaled(K, dt);
    Eigen::VectorXd rhs = M * u0 + dt * load(t0 + dt);
    return solve_spd(A, rhs, rtol, nullptr, &u0);
  }
  const SparseMatrix A = M.plus_scaled(K, 0.5 * dt);
  Eigen::VectorXd rhs = M * u0 - 0.5 * dt * (K * u0) +
                        0.5 * dt * (load(t0) + load(t0 + dt));
  return solve_spd(A, rhs, rtol, nullptr, &u0);
}

/// Integrates to T with uniform dt. `start_be_steps` leading steps use
/// backward Euler (each as two half steps) to damp rough initial data before
/// Crank-Nicolson takes over. An observer, when given, sees every state and
/// the trajectory is not stored.
inline Trajectory solve_parabolic(
    const SparseMatrix& M, const SparseMatrix& K, const Eigen::VectorXd& u0,
    const std::function<Eigen::VectorXd(double)>& load, double T, double dt,
    Scheme scheme, double rtol = 1e-10, int start_be_steps = 0,
    const std::function<void(int, double, const Eigen::VectorXd&)>& observer = {}) {
  if (!(T > 0) || !(dt > 0) || dt > T * (1 + 1e-12))
    throw ConfigError("solve_parabolic needs 0 < dt <= T");
  const int nsteps = static_cast<int>(std::llround(T / dt));
  if (std::abs(nsteps * dt - T) > 1e-10 * T)
    throw ConfigError("dt must divide T");

  Trajectory traj;
  traj.scheme = scheme;
  traj.dt = dt;
  const bool store = !observer;

  // Pre-assembled implicit matrices.
  const SparseMatrix Abe = M.plus_scaled(K, 0.5 * dt);   // BE half steps
  const SparseMatrix Acn = M.plus_scaled(K, 0.5 * dt);   // CN full steps
  Eigen::VectorXd u = u0;
  double t = 0;
  if (observer) observer(0, 0.0, u);
  if (store) {
    traj.times.push_back(0);
    traj.states.push_back(u);
  }
  for (int n = 0; n < nsteps; ++n) {
    if (scheme == Scheme::CrankNicolson && n < start_be_steps) {
      // two backward-Euler half steps
      for (int half = 0; half < 2; ++half) {
        Eigen::VectorXd rhs = M * u + 0.5 * dt * load(t + 0.5 * dt * (half + 1));
        u = solve_spd(Abe, rhs, rtol, nullptr, &u);
      }
    } else if (scheme == Scheme::BackwardEuler) {
      const SparseMatrix A = M.plus_scaled(K, dt);
      Eigen::VectorXd rhs = M * u + dt * load(t + dt);
      u = solve_spd(A, rhs, rtol, nullptr, &u);
    } else {
      Eigen::VectorXd rhs =
          M * u - 0.5 * dt * (K * u) + 0.5 * dt * (load(t) + load(t + dt));
      u = solve_spd(Acn, rhs, rtol, nullptr, &u);
    }
    t = (n + 1) * dt;
    if (observer) observer(n + 1, t, u);
    if (store) {
      traj.times.push_back(t);
      traj.states.push_back(u);
    }
  }
  return traj;
}

/// A_h u: solves M w = K u.
inline Eigen::VectorXd apply_Ah(const SparseMatrix& M, const SparseMatrix& K,
                                const Eigen::VectorXd& u, double rtol = 1e-12) {
  return solve_spd(M, K * u, rtol);
}

/// Dense generalized symmetric eigenpairs of K v = lambda M v, M-orthonormal,
/// eigenvalues ascending (all >= 1 thanks to the +1 mass term in a).
class EigenBasis {
 public:
  EigenBasis(const SparseMatrix& M, const SparseMatrix& K, int cap = 3000) {
    if (M.n > cap)
      throw TooLarge("eigen_basis: " + std::to_string(M.n) + " dofs > cap " +
                     std::to_string(cap));
    Eigen::MatrixXd Md = M.dense(), Kd = K.dense();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kd, Md);
    if (es.info() != Eigen::Success)
      throw NoConvergence("generalized eigensolve failed");
    lambda_ = es.eigenvalues();
    V_ = es.eigenvectors();
    Mdense_ = std::move(Md);
  }

  int size() const { return static_cast<int>(lambda_.size()); }
  const Eigen::VectorXd& eigenvalues() const { return lambda_; }
  const Eigen::MatrixXd& eigenvectors() const { return V_; }
  const Eigen::MatrixXd& mass() const { return Mdense_; }
  double lambda_max() const { return lambda_[size() - 1]; }

  /// Modal coefficients of the function with dof coefficients c: V^T M c.
  Eigen::VectorXd to_modal(const Eigen::VectorXd& c) const {
    return V_.transpose() * (Mdense_ * c);
  }
  Eigen::VectorXd from_modal(const Eigen::VectorXd& y) const { return V_ * y; }

  /// e^{-t A_h} v0.
  Eigen::VectorXd semigroup_apply(const Eigen::VectorXd& v0, double t) const {
    if (t < 0) throw ConfigError("semigroup needs t >= 0");
    Eigen::VectorXd y = to_modal(v0);
    y.array() *= (-t * lambda_.array()).exp();
    return from_modal(y);
  }

  /// d/dt e^{-t A_h} v0 = -A_h e^{-t A_h} v0.
  Eigen::VectorXd semigroup_derivative(const Eigen::VectorXd& v0, double t) const {
    Eigen::VectorXd y = to_modal(v0);
    y.array() *= -lambda_.array() * (-t * lambda_.array()).exp();
    return from_modal(y);
  }

 private:
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd V_;
  Eigen::MatrixXd Mdense_;
};

struct SmoothingSample {
  double norm_u = 0;       // ||u_h(t)||_q
  double t_norm_dtu = 0;   // t ||d/dt u_h(t)||_q
};

/// ||u_h(t)||_q and t ||u_h'(t)||_q for the homogeneous flow from v0;
/// q = 2 or q <= 0 for L-infinity.
inline SmoothingSample smoothing_bounds(const FeSpace& sp, const EigenBasis& eb,
                                        const Eigen::VectorXd& v0, double t,
                                        double q) {
  SmoothingSample s;
  const Eigen::VectorXd u = eb.semigroup_apply(v0, t);
  const Eigen::VectorXd du = eb.semigroup_derivative(v0, t);
  s.norm_u = lq_norm(sp, u, q);
  s.t_norm_dtu = t * lq_norm(sp, du, q);
  return s;
}

}  // namespace skinfem
