#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

#include "skinfem/assemble.hpp"
#include "skinfem/maxreg.hpp"
#include "skinfem/parabolic.hpp"

using namespace skinfem;

namespace {

Mesh unit_right_triangle() {
  Mesh m;
  m.domain = SmoothDomain::square(4);
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.boundary_param = {0, 0, 0};
  m.triangles = {{0, 1, 2}};
  m.neighbors = {{-1, -1, -1}};
  m.boundary_edges = {{0, 1, 0}, {1, 2, 0}, {2, 0, 0}};
  m.h_max = m.h_min = std::sqrt(2.0);
  return m;
}

std::function<Eigen::VectorXd(double)> zero_load(int n) {
  return [n](double) { return Eigen::VectorXd::Zero(n); };
}

}  // namespace

TEST_CASE("constants follow the scalar recurrences") {
  FeSpace sp(build_mesh(SmoothDomain::disk(1), 0.3), 1);
  const SparseMatrix M = assemble_mass(sp);
  const SparseMatrix K = assemble_form(sp);
  const int n = sp.num_dofs();
  const double c0 = 2.5, dt = 0.1;
  const Eigen::VectorXd u0 = c0 * Eigen::VectorXd::Ones(n);

  const Trajectory be = solve_parabolic(M, K, u0, zero_load(n), 0.5, dt,
                                        Scheme::BackwardEuler);
  const Trajectory cn = solve_parabolic(M, K, u0, zero_load(n), 0.5, dt,
                                        Scheme::CrankNicolson);
  for (int s = 0; s <= 5; ++s) {
    const double be_exact = c0 / std::pow(1.0 + dt, s);
    const double cn_exact = c0 * std::pow((1 - dt / 2) / (1 + dt / 2), s);
    CHECK((be.at(s) - be_exact * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() <
          1e-9);
    CHECK((cn.at(s) - cn_exact * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() <
          1e-9);
  }
}

TEST_CASE("zero data stays zero; BE contracts the M-norm") {
  FeSpace sp(build_mesh(SmoothDomain::ellipse(2, 1), 0.2), 1);
  const SparseMatrix M = assemble_mass(sp);
  const SparseMatrix K = assemble_form(sp);
  const int n = sp.num_dofs();
  const Trajectory z = solve_parabolic(M, K, Eigen::VectorXd::Zero(n),
                                       zero_load(n), 0.3, 0.1,
                                       Scheme::BackwardEuler);
  for (const auto& s : z.states) CHECK(s.cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(4);
  Eigen::VectorXd u0(n);
  for (int i = 0; i < n; ++i) u0[i] = (rng() & 1u) ? 1.0 : -1.0;
  const Trajectory t = solve_parabolic(M, K, u0, zero_load(n), 0.3, 0.05,
                                       Scheme::BackwardEuler);
  for (int s = 1; s <= t.steps(); ++s) {
    const double prev = t.at(s - 1).dot(M * t.at(s - 1));
    const double cur = t.at(s).dot(M * t.at(s));
    CHECK(cur <= prev * (1 + 1e-12));
  }
}

TEST_CASE("stepper matches the dense 3x3 recurrence on one element") {
  FeSpace sp(unit_right_triangle(), 1);
  const SparseMatrix M = assemble_mass(sp);
  const SparseMatrix K = assemble_form(sp);
  const Eigen::MatrixXd Md = M.dense(), Kd = K.dense();
  Eigen::VectorXd u(3);
  u << 0.3, -1.0, 2.0;
  Eigen::VectorXd v = u;
  const double dt = 0.05;
  const auto load = [](double t) {
    Eigen::VectorXd f(3);
    f << std::sin(t), std::cos(t), t;
    return f;
  };
  for (int s = 0; s < 10; ++s) {
    const double t0 = s * dt;
    u = step(M, K, u, dt, load, t0, Scheme::CrankNicolson, 1e-13);
    // independent dense route
    const Eigen::MatrixXd A = Md + 0.5 * dt * Kd;
    const Eigen::VectorXd rhs =
        (Md - 0.5 * dt * Kd) * v + 0.5 * dt * (load(t0) + load(t0 + dt));
    v = A.fullPivLu().solve(rhs);
    CHECK((u - v).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("apply_Ah") {
  FeSpace sp(unit_right_triangle(), 1);
  const SparseMatrix M = assemble_mass(sp);
  const SparseMatrix K = assemble_form(sp);
  // constants are lambda = 1 eigenfunctions
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  CHECK((apply_Ah(M, K, ones) - ones).cwiseAbs().maxCoeff() < 1e-10);
  // dense oracle M^-1 K
  Eigen::VectorXd u(3);
  u << 1.0, -0.5, 0.25;
  const Eigen::VectorXd dense = M.dense().fullPivLu().solve(K.dense() * u);
  CHECK((apply_Ah(M, K, u) - dense).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("eigen basis invariants and the disk Neumann eigenvalue") {
  FeSpace sp(build_mesh(SmoothDomain::disk(1), 0.1), 1);
  const SparseMatrix M = assemble_mass(sp);
  const SparseMatrix K = assemble_form(sp);
  const EigenBasis eb(M, K);
  const int n = eb.size();
  REQUIRE(n == sp.num_dofs());
  CHECK(eb.eigenvalues()[0] >= 1.0 - 1e-9);
  for (int i = 1; i < n; ++i)
    CHECK(eb.eigenvalues()[i] >= eb.eigenvalues()[i - 1]);
  // M-orthonormality
  const Eigen::MatrixXd G =
      eb.eigenvectors().transpose() * M.dense() * eb.eigenvectors();
  CHECK((G - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8);
  // K V = M V diag(lambda)
  const Eigen::MatrixXd R = K.dense() * eb.eigenvectors() -
                            M.dense() * eb.eigenvectors() *
                                eb.eigenvalues().asDiagonal();
  CHECK(R.cwiseAbs().maxCoeff() < 1e-7 * eb.lambda_max());
  // apply_Ah on an eigenvector gives lambda v
  const int mid = n / 2;
  const Eigen::VectorXd av = apply_Ah(M, K, eb.eigenvectors().col(mid));
  CHECK((av - eb.eigenvalues()[mid] * eb.eigenvectors().col(mid))
            .cwiseAbs()
            .maxCoeff() < 1e-6 * eb.eigenvalues()[mid]);
  // reconstruction in action: A_h x = V diag(lambda) V^T M x
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = (rng() & 1u) ? 1.0 : -1.0;
    const Eigen::VectorXd spectral = eb.from_modal(
        (eb.eigenvalues().array() * eb.to_modal(x).array()).matrix());
    const Eigen::VectorXd direct = apply_Ah(M, K, x);
    CHECK((spectral - direct).norm() < 1e-6 * direct.norm());
  }
  // first nonzero Neumann eigenvalue of the unit disk: (j'_{1,1})^2, doubly
  // degenerate. Root of J_1' computed here independently via std::cyl_bessel_j.
  double root = 1.8;
  for (int it = 0; it < 60; ++it) {
    const double x = root;
    const double j1 = std::cyl_bessel_j(1, x);
    const double j0 = std::cyl_bessel_j(0, x);
    const double f = j0 - j1 / x;              // J_1'(x)
    const double fp = -j1 - (j0 * x - 2 * j1) / (x * x);  // d/dx J_1'
    root -= f / fp;
  }
  const double lam2_exact = 1.0 + root * root;
  CHECK(std::abs(root - 1.8412) < 1e-4);
  CHECK(std::abs(eb.eigenvalues()[1] - lam2_exact) < 0.05 * lam2_exact);
  CHECK(std::abs(eb.eigenvalues()[2] - lam2_exact) < 0.05 * lam2_exact);
}

TEST_CASE("eigen cap is enforced") {
  FeSpace sp(build_mesh(SmoothDomain::disk(1), 0.2), 1);
  const SparseMatrix M = assemble_mass(sp);
  const SparseMatrix K = assemble_form(sp);
  CHECK_THROWS_AS(EigenBasis(M, K, sp.num_dofs() - 1), TooLarge);
}

TEST_CASE("semigroup: identity, composition, decay") {
  FeSpace sp(build_mesh(SmoothDomain::disk(1), 0.25), 1);
  const SparseMatrix M = assemble_mass(sp);
  const SparseMatrix K = assemble_form(sp);
  const EigenBasis eb(M, K);
  const int n = sp.num_dofs();
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd v0(n);
    for (int i = 0; i < n; ++i) v0[i] = (rng() & 1u) ? 1.0 : -1.0;
    CHECK((eb.semigroup_apply(v0, 0.0) - v0).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::VectorXd ab = eb.semigroup_apply(eb.semigroup_apply(v0, 0.3), 0.2);
    const Eigen::VectorXd once = eb.semigroup_apply(v0, 0.5);
    CHECK((ab - once).cwiseAbs().maxCoeff() < 1e-8);
    for (double t : {0.1, 0.5, 1.0}) {
      const Eigen::VectorXd u = eb.semigroup_apply(v0, t);
      const double un = std::sqrt(u.dot(M * u));
      const double v0n = std::sqrt(v0.dot(M * v0));
      CHECK(un <= std::exp(-t) * v0n * (1 + 1e-10));
    }
  }
  // constants decay exactly like e^{-t}
  const Eigen::VectorXd c = 3.0 * Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd u = eb.semigroup_apply(c, 0.7);
  CHECK((u - std::exp(-0.7) * c).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("spectral path agrees with fine backward-Euler stepping") {
  FeSpace sp(build_mesh(SmoothDomain::disk(1), 0.2), 1);
  const SparseMatrix M = assemble_mass(sp);
  const SparseMatrix K = assemble_form(sp);
  const EigenBasis eb(M, K);
  const int n = sp.num_dofs();
  std::mt19937_64 rng(21);
  Eigen::VectorXd v0(n);
  for (int i = 0; i < n; ++i) v0[i] = (rng() & 1u) ? 1.0 : -1.0;
  const Trajectory t = solve_parabolic(M, K, v0, zero_load(n), 0.1, 1e-4,
                                       Scheme::BackwardEuler);
  const Eigen::VectorXd spectral = eb.semigroup_apply(v0, 0.1);
  const Eigen::VectorXd dd = t.states.back() - spectral;
  CHECK(std::sqrt(dd.dot(M * dd)) <
        1e-3 * std::sqrt(spectral.dot(M * spectral)));
}

TEST_CASE("smoothing bounds: closed forms and the spectral ceiling") {
  FeSpace sp(build_mesh(SmoothDomain::disk(1), 0.25), 1);
  const SparseMatrix M = assemble_mass(sp);
  const SparseMatrix K = assemble_form(sp);
  const EigenBasis eb(M, K);
  const int n = sp.num_dofs();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const double onesq = lq_norm(sp, ones, 2.0);
  for (double t : {0.1, 0.5, 1.0}) {
    const SmoothingSample s = smoothing_bounds(sp, eb, ones, t, 2.0);
    CHECK(s.norm_u == Catch::Approx(std::exp(-t) * onesq).epsilon(1e-8));
    CHECK(s.t_norm_dtu == Catch::Approx(t * std::exp(-t) * onesq).epsilon(1e-8));
  }
  // t ||du/dt||_2 <= (2/e) e^{-t/2} ||v0||_2 for any v0 (lambda >= 1)
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd v0(n);
    for (int i = 0; i < n; ++i) v0[i] = (rng() & 1u) ? 1.0 : -1.0;
    const double v0n = lq_norm(sp, v0, 2.0);
    for (double t : {0.1, 0.5, 1.0}) {
      const SmoothingSample s = smoothing_bounds(sp, eb, v0, t, 2.0);
      CHECK(s.t_norm_dtu <=
            (2.0 / std::exp(1.0)) * std::exp(-0.5 * t) * v0n * (1 + 1e-9));
    }
  }
}

TEST_CASE("maxreg: analytic value for the resonant constant load") {
  FeSpace sp(build_mesh(SmoothDomain::disk(1), 0.3), 1);
  const SparseMatrix M = assemble_mass(sp);
  const SparseMatrix K = assemble_form(sp);
  const EigenBasis eb(M, K);
  const double T = 0.25;
  const MaxregLoad load = MaxregLoad::smooth(
      "exp", Eigen::VectorXd::Ones(eb.size()),
      [](double t) { return std::exp(-t); });
  const MaxregResult r = maxreg_ratio(sp, eb, load, T, 2, 256);
  // constants are exact lambda = 1 modes: u = t e^{-t}, A u = t e^{-t},
  // u_t = (1-t) e^{-t}; all three closed forms integrate in elementary terms
  const auto int_exp2 = [](double a) {  // int_0^a e^{-2t}
    return 0.5 * (1 - std::exp(-2 * a));
  };
  const auto int_t_exp2 = [](double a) {  // int_0^a t e^{-2t}
    return 0.25 - std::exp(-2 * a) * (0.5 * a + 0.25);
  };
  const auto int_t2_exp2 = [](double a) {  // int_0^a t^2 e^{-2t}
    return 0.25 - std::exp(-2 * a) * (0.5 * a * a + 0.5 * a + 0.25);
  };
  const double nf = std::sqrt(int_exp2(T));
  const double nau = std::sqrt(int_t2_exp2(T));
  const double nut =
      std::sqrt(int_exp2(T) - 2 * int_t_exp2(T) + int_t2_exp2(T));
  const double exact = (nau + nut) / nf;
  CHECK(std::abs(r.ratio - exact) < 0.01 * exact);
}

TEST_CASE("maxreg: dense brute force on a single element") {
  FeSpace sp(unit_right_triangle(), 1);
  const SparseMatrix M = assemble_mass(sp);
  const SparseMatrix K = assemble_form(sp);
  const EigenBasis eb(M, K);
  const double T = 0.25;
  const int n_sub = 4096;
  const int n_outer = 64, stride = n_sub / n_outer;
  for (std::uint64_t seed : {11u, 22u, 33u}) {
    const MaxregLoad load = MaxregLoad::random("r", seed);
    const MaxregResult r = maxreg_ratio(sp, eb, load, T, 2, n_sub);
    // Independent dense route: exact matrix-exponential propagation of
    // M u' + K u = M f across the refresh intervals (no eigen decomposition,
    // no midpoint rule), sampled on the same outer Simpson grid.
    const Eigen::MatrixXd Md = M.dense(), Kd = K.dense();
    const Eigen::MatrixXd A = Md.fullPivLu().solve(Kd);
    const double dt = T / n_sub;
    const Eigen::MatrixXd E = (-dt * A).exp();
    const Eigen::MatrixXd I3 = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd S = A.fullPivLu().solve(I3 - E);  // int_0^dt e^{-sA} ds
    Eigen::VectorXd u = Eigen::VectorXd::Zero(3);
    double iau = 0, iut = 0, iff = 0;
    const double douter = T / n_outer;
    const auto simpson_w = [&](int i) {
      return ((i == 0 || i == n_outer) ? 1.0 : (i % 2 ? 4.0 : 2.0)) * douter / 3.0;
    };
    Eigen::VectorXd f(3);
    skinfem::detail::random_signs(seed, 0, 3, f);
    {
      const Eigen::VectorXd ut0 = f;  // u(0) = 0
      iut += simpson_w(0) * ut0.dot(Md * ut0);
    }
    for (int m = 0; m < n_sub; ++m) {
      skinfem::detail::random_signs(seed, m, 3, f);
      iff += dt * f.dot(Md * f);
      u = (E * u + S * f).eval();
      if ((m + 1) % stride == 0) {
        const int i = (m + 1) / stride;
        const Eigen::VectorXd au = A * u;
        Eigen::VectorXd fr(3);  // right-continuous load value at the node
        skinfem::detail::random_signs(seed, std::min((m + 1), n_sub - 1), 3, fr);
        const Eigen::VectorXd ut = fr - au;
        iau += simpson_w(i) * au.dot(Md * au);
        iut += simpson_w(i) * ut.dot(Md * ut);
      }
    }
    const double brute = (std::sqrt(iau) + std::sqrt(iut)) / std::sqrt(iff);
    CHECK(std::abs(r.ratio - brute) < 0.01 * brute);
    CHECK(r.ratio <= 1.05);
  }
}

TEST_CASE("maxreg: zero load gives ratio zero; degree guard") {
  FeSpace sp(unit_right_triangle(), 1);
  const SparseMatrix M = assemble_mass(sp);
  const SparseMatrix K = assemble_form(sp);
  const EigenBasis eb(M, K);
  const MaxregLoad z = MaxregLoad::smooth("zero", Eigen::VectorXd::Zero(3),
                                          [](double) { return 0.0; });
  CHECK(maxreg_ratio(sp, eb, z, 0.25, 2, 256).ratio == 0.0);
  CHECK_THROWS_AS(maxreg_ratio(sp, eb, z, 0.25, 3, 256), ConfigError);
  CHECK_THROWS_AS(maxreg_ratio(sp, eb, z, 0.25, 2, 100), ConfigError);
}
