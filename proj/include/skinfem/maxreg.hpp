#pragma once

// Discrete maximal regularity measurements: for loads f_h in V_h with
// u_h(0) = 0, computes (||A_h u_h|| + ||d/dt u_h||) / ||f_h|| in
// L^p(0,T; L^q(Omega_h)) with p = q in {2, 4}. u_h is evaluated through the
// eigenbasis by a midpoint-rule Duhamel recurrence on a uniform substep grid;
// the outer time integral is composite Simpson.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

#include "skinfem/core.hpp"
#include "skinfem/norms.hpp"
#include "skinfem/parabolic.hpp"

namespace skinfem {

struct MaxregLoad {
  enum class Kind {
    Smooth,          // f(t) = phi(t) * base
    PiecewiseRandom  // iid +-1 dof coefficients, refreshed every substep
  };
  Kind kind = Kind::Smooth;
  std::string name;
  Eigen::VectorXd base;                // Smooth only
  std::function<double(double)> phi;   // Smooth only
  std::uint64_t seed = 0;              // PiecewiseRandom only

  static MaxregLoad smooth(std::string name, Eigen::VectorXd base,
                           std::function<double(double)> phi) {
    MaxregLoad l;
    l.kind = Kind::Smooth;
    l.name = std::move(name);
    l.base = std::move(base);
    l.phi = std::move(phi);
    return l;
  }
  static MaxregLoad random(std::string name, std::uint64_t seed) {
    MaxregLoad l;
    l.kind = Kind::PiecewiseRandom;
    l.name = std::move(name);
    l.seed = seed;
    return l;
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic +-1 vector for (seed, interval).
inline void random_signs(std::uint64_t seed, std::uint64_t interval, int n,
                         Eigen::VectorXd& out) {
  out.resize(n);
  std::uint64_t s = seed ^ (interval * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  std::uint64_t word = 0;
  int bits = 0;
  for (int i = 0; i < n; ++i) {
    if (bits == 0) {
      word = splitmix64(s);
      bits = 64;
    }
    out[i] = (word & 1u) ? 1.0 : -1.0;
    word >>= 1;
    --bits;
  }
}

inline double simpson_weight(int i, int n_intervals) {
  if (i == 0 || i == n_intervals) return 1.0;
  return (i % 2 == 1) ? 4.0 : 2.0;
}

}  // namespace detail

struct MaxregResult {
  double ratio = 0;
  double norm_Au = 0, norm_dtu = 0, norm_f = 0;
};

/// The measured maximal-regularity quotient. `n_sub` must be a positive
/// multiple of 64 (the outer Simpson grid); p = q in {2, 4}.
inline MaxregResult maxreg_ratio(const FeSpace& sp, const EigenBasis& eb,
                                 const MaxregLoad& load, double T, int p,
                                 int n_sub = 256) {
  if (p != 2 && p != 4) throw ConfigError("maxreg supports p = q in {2,4}");
  if (n_sub < 64 || n_sub % 64 != 0)
    throw ConfigError("n_sub must be a positive multiple of 64");
  const int n = eb.size();
  const int n_outer = 64;
  const int stride = n_sub / n_outer;
  const double dt = T / n_sub;
  const Eigen::ArrayXd lam = eb.eigenvalues().array();
  const Eigen::ArrayXd decay = (-dt * lam).exp();
  const Eigen::ArrayXd half_decay = (-0.5 * dt * lam).exp();

  Eigen::VectorXd modal_base;
  if (load.kind == MaxregLoad::Kind::Smooth) modal_base = eb.to_modal(load.base);

  // physical / modal load at outer node t_i (right-continuous for piecewise)
  Eigen::VectorXd scratch_phys;
  const auto phys_load_at = [&](int i) -> Eigen::VectorXd {
    if (load.kind == MaxregLoad::Kind::Smooth)
      return load.phi(i * stride * dt) * load.base;
    const int m = std::min(i * stride, n_sub - 1);
    detail::random_signs(load.seed, m, sp.num_dofs(), scratch_phys);
    return scratch_phys;
  };
  const auto modal_load_at = [&](int i) -> Eigen::VectorXd {
    if (load.kind == MaxregLoad::Kind::Smooth)
      return load.phi(i * stride * dt) * modal_base;
    return eb.to_modal(phys_load_at(i));
  };

  // Duhamel midpoint recurrence; record outer nodes. Random loads are
  // transformed to modal coordinates in blocks so the V^T M multiply runs as
  // a GEMM rather than one memory-bound GEMV per substep.
  std::vector<Eigen::VectorXd> y_outer(n_outer + 1);
  y_outer[0] = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  double f_p2_exact = 0;  // exact L2(L2)^2 of piecewise-constant loads
  if (load.kind == MaxregLoad::Kind::Smooth) {
    for (int m = 0; m < n_sub; ++m) {
      y.array() = decay * y.array() +
                  (dt * load.phi((m + 0.5) * dt)) * half_decay * modal_base.array();
      if ((m + 1) % stride == 0) y_outer[(m + 1) / stride] = y;
    }
  } else {
    const int B = std::min(128, n_sub);
    const int ndof = sp.num_dofs();
    Eigen::MatrixXd signs(ndof, B), msigns(ndof, B), cmodal;
    Eigen::VectorXd col(ndof);
    for (int m0 = 0; m0 < n_sub; m0 += B) {
      const int nb = std::min(B, n_sub - m0);
      for (int j = 0; j < nb; ++j) {
        detail::random_signs(load.seed, m0 + j, ndof, col);
        signs.col(j) = col;
      }
      msigns.leftCols(nb) = eb.mass() * signs.leftCols(nb);
      cmodal.noalias() = eb.eigenvectors().transpose() * msigns.leftCols(nb);
      for (int j = 0; j < nb; ++j) {
        const int m = m0 + j;
        f_p2_exact += dt * cmodal.col(j).squaredNorm();
        y.array() = decay * y.array() + dt * half_decay * cmodal.col(j).array();
        if ((m + 1) % stride == 0) y_outer[(m + 1) / stride] = y;
      }
    }
  }

  // Outer Simpson accumulation of ||A_h u||^p and ||u_t||^p, plus ||f||^p.
  const double douter = T / n_outer;
  double acc_Au = 0, acc_ut = 0, acc_f = 0;
  for (int i = 0; i <= n_outer; ++i) {
    const double w = detail::simpson_weight(i, n_outer) * douter / 3.0;
    const Eigen::VectorXd au_modal = (lam * y_outer[i].array()).matrix();
    if (p == 2) {
      const Eigen::VectorXd f_modal = modal_load_at(i);
      acc_Au += w * au_modal.squaredNorm();
      acc_ut += w * (f_modal - au_modal).squaredNorm();
      acc_f += w * f_modal.squaredNorm();
    } else {
      const Eigen::VectorXd au_phys = eb.from_modal(au_modal);
      const Eigen::VectorXd f_phys = phys_load_at(i);
      const Eigen::VectorXd ut_phys = f_phys - au_phys;
      const double qd = 4;
      acc_Au += w * std::pow(lq_norm(sp, au_phys, qd), 4);
      acc_ut += w * std::pow(lq_norm(sp, ut_phys, qd), 4);
      acc_f += w * std::pow(lq_norm(sp, f_phys, qd), 4);
    }
  }
  // Exact time integral for smooth phi (Simpson of |phi|^p on a fine grid),
  // and the exact piecewise sum for random loads at p = 2.
  if (load.kind == MaxregLoad::Kind::Smooth) {
    const int nf = 4096;
    double iphi = 0;
    for (int i = 0; i <= nf; ++i)
      iphi += detail::simpson_weight(i, nf) * (T / nf / 3.0) *
              std::pow(std::abs(load.phi(i * T / nf)), p);
    const double base_q =
        (p == 2) ? std::sqrt(eb.to_modal(load.base).squaredNorm())
                 : lq_norm(sp, load.base, 4);
    acc_f = iphi * std::pow(base_q, p);
  } else if (p == 2) {
    acc_f = f_p2_exact;
  }

  MaxregResult r;
  r.norm_Au = std::pow(acc_Au, 1.0 / p);
  r.norm_dtu = std::pow(acc_ut, 1.0 / p);
  r.norm_f = std::pow(acc_f, 1.0 / p);
  r.ratio = (r.norm_f > 0) ? (r.norm_Au + r.norm_dtu) / r.norm_f : 0.0;
  return r;
}

/// Substep count giving refresh/quadrature scale delta with
/// delta * lambda_max <= target (rounded up to a multiple of 64).
inline int maxreg_substeps(double T, double lambda_max, double target = 0.005,
                           int floor_steps = 256) {
  const int raw = static_cast<int>(std::ceil(T * lambda_max / target));
  const int steps = std::max(floor_steps, raw);
  return ((steps + 63) / 64) * 64;
}

}  // namespace skinfem
