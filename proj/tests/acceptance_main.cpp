// Acceptance suite: one pass/fail line per criterion. Every tolerance is
// pinned here. Exit code 0 when all criteria pass.
//
//   skinfem_acceptance [--criterion N] [--quick]
//
// --quick trims the heaviest runs (for development only; the recorded result
// still prints which mode ran).

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "skinfem/experiments.hpp"

using namespace skinfem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome from_report(const Report& rep, const std::string& required = "") {
  Outcome o;
  o.pass = true;
  std::string msg;
  for (const auto& v : rep.verdicts) {
    if (!required.empty() && v.name != required) continue;
    if (!v.pass) o.pass = false;
    msg += (msg.empty() ? "" : "; ") + v.name + (v.pass ? " ok" : " FAILED") +
           " (" + v.detail + ")";
  }
  o.detail = msg;
  return o;
}

// --- criterion 1: rate cap on the non-convex star with k = 2 ---------------

Outcome criterion1(bool quick) {
  const Config cfg = Config::parse(R"(
[converge]
domain = star
star.base_radius = 2.0
star.amplitude = 0.2
star.frequency = 3
k = 2
h0 = 0.4
levels = 4
T = 0.5
dt_rule = 0.5*h
solution = u1
eoc_window_lo = 1.7
eoc_window_hi = 2.5
control_eoc_min = 2.6
)");
  const Report rep = run_convergence(cfg, 0, quick ? 3 : -1);
  Outcome o = from_report(rep);
  char buf[160];
  std::snprintf(buf, sizeof buf, "; scheme slope %.3f, control slope %.3f",
                rep.summary["slope"].get<double>(),
                rep.summary["control_slope"].get<double>());
  o.detail += buf;
  return o;
}

// --- criterion 2: k = 1 optimal-up-to-log rate on the disk ------------------

Outcome criterion2(bool quick) {
  const Config cfg = Config::parse(R"(
[converge]
domain = disk
disk.radius = 1.0
k = 1
h0 = 0.4
levels = 4
T = 0.5
dt_rule = 0.5*h
solution = u1
eoc_window_lo = 1.7
eoc_window_hi = 2.3
)");
  const Report rep = run_convergence(cfg, 0, quick ? 3 : -1);
  Outcome o = from_report(rep);
  char buf[96];
  std::snprintf(buf, sizeof buf, "; slope %.3f", rep.summary["slope"].get<double>());
  o.detail += buf;
  return o;
}

// --- criterion 3: boundary-skin geometry ------------------------------------

Outcome criterion3(bool) {
  const Config cfg = Config::parse(R"(
[skin]
domain = star
star.base_radius = 2.0
star.amplitude = 0.2
star.frequency = 3
h0 = 0.4
levels = 4
)");
  Outcome o = from_report(run_skin(cfg, 0));

  // regular inscribed 16-gon on the unit disk: analytic values to 1e-6
  const Mesh m = build_mesh(SmoothDomain::disk(1), 0.41);
  if (m.boundary_edges.size() != 16) {
    o.pass = false;
    o.detail += "; 16-gon construction failed";
    return o;
  }
  const SkinDiagnostics d = skin_diagnostics(m);
  const double t_exact = 1.0 - std::cos(kPi / 16);          // 0.0192147
  const double a_exact = kPi - 8.0 * std::sin(kPi / 8);     // 0.0801252
  const double n_exact = 2.0 * std::sin(kPi / 32);          // 0.1960343
  const bool g16 = std::abs(d.sup_t_star - t_exact) < 1e-6 &&
                   std::abs(d.skin_area_out + d.skin_area_in - a_exact) < 1e-6 &&
                   std::abs(d.normal_deviation_max - n_exact) < 1e-6;
  if (!g16) o.pass = false;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "; 16-gon %s (sup t* %.7f vs %.7f, area %.7f vs %.7f, "
                "normal %.7f vs %.7f)",
                g16 ? "ok" : "FAILED", d.sup_t_star, t_exact,
                d.skin_area_out + d.skin_area_in, a_exact,
                d.normal_deviation_max, n_exact);
  o.detail += buf;
  return o;
}

// --- criterion 4: regularized delta -----------------------------------------

Outcome criterion4(bool) {
  Outcome o;
  o.pass = true;
  double worst_resid = 0;
  std::vector<std::pair<double, double>> sup_rows[4];  // per degree
  double worst_decay = -1e300;
  int decay_checked = 0;
  for (double h : {0.4, 0.2, 0.1, 0.05}) {
    const Mesh mesh = build_mesh(SmoothDomain::disk(1), h);
    for (int k = 1; k <= 3; ++k) {
      FeSpace sp(mesh, k);
      const Vec2 anchor = detail::delta_anchor(sp);
      const RegularizedDelta d = build_delta(sp, anchor);
      worst_resid = std::max(worst_resid, delta_moment_residual(sp, d));
      if (k == 1) sup_rows[1].push_back({mesh.h_max, delta_sup_norm(d)});
      if (k == 2) sup_rows[2].push_back({mesh.h_max, delta_sup_norm(d)});
      if (k == 3) sup_rows[3].push_back({mesh.h_max, delta_sup_norm(d)});
      if (k == 1 && h <= 0.2) {
        const SparseMatrix M = assemble_mass(sp);
        const DeltaProjection proj = project_delta(sp, M, d);
        if (proj.decay_bins >= 4) {
          worst_decay = std::max(worst_decay, proj.decay_slope);
          ++decay_checked;
        }
      }
    }
  }
  if (worst_resid > 1e-10) o.pass = false;
  double slopes[4] = {0, 0, 0, 0};
  for (int k = 1; k <= 3; ++k) {
    slopes[k] = fit_rate(sup_rows[k]).slope;
    if (slopes[k] < -2.3 || slopes[k] > -1.7) o.pass = false;
  }
  if (decay_checked == 0 || worst_decay >= -0.3) o.pass = false;
  char buf[240];
  std::snprintf(buf, sizeof buf,
                "moment residual max %.2e (cap 1e-10); sup|delta| slopes "
                "k=1..3: %.2f %.2f %.2f (target -2 +- 0.3); envelope decay "
                "slope %.2f (< -0.3, %d fits)",
                worst_resid, slopes[1], slopes[2], slopes[3], worst_decay,
                decay_checked);
  o.detail = buf;
  return o;
}

// --- criterion 5: smoothing --------------------------------------------------

Outcome criterion5(bool quick) {
  const Config cfg = Config::parse(R"(
[smoothing]
domain = disk
disk.radius = 1.0
k = 1
h0 = 0.4
levels = 4
)");
  return from_report(run_smoothing(cfg, 0, quick ? 3 : -1));
}

// --- criterion 6: maximal regularity ----------------------------------------

Outcome criterion6(bool) {
  const Config cfg = Config::parse(R"(
[maxreg]
domain = disk
disk.radius = 2.0
k = 1
h0 = 0.3
levels = 2
T = 0.25
random_loads = 20
dl_target = 0.005
p2_ceiling = 1.05
drift_cap = 0.15
)");
  const Report rep = run_maxreg(cfg, 0);
  Outcome o = from_report(rep);

  // single-eigenmode loads against the scalar-ODE oracle (within 1%):
  // mode2 with phi = 1 has the closed form y = (1 - e^{-lam t}) / lam;
  // the high mode's sin^2 ramp is integrated by fine RK4. Both ratios use
  // the same outer Simpson measure as the artifact.
  const double T = 0.25;
  const auto scalar_ratio = [&](double lam, const std::function<double(double)>& phi) {
    const int nf = 1 << 16;
    const double dt = T / nf;
    std::vector<double> y(nf + 1, 0.0);
    for (int m = 0; m < nf; ++m) {
      const double t = m * dt;
      const auto rhs = [&](double tt, double yy) { return phi(tt) - lam * yy; };
      const double k1 = rhs(t, y[m]);
      const double k2 = rhs(t + dt / 2, y[m] + dt / 2 * k1);
      const double k3 = rhs(t + dt / 2, y[m] + dt / 2 * k2);
      const double k4 = rhs(t + dt, y[m] + dt * k3);
      y[m + 1] = y[m] + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    // Simpson on 64 intervals, matching the artifact's outer measure
    const int n_outer = 64, stride = nf / n_outer;
    double iau = 0, iut = 0, iff = 0;
    for (int i = 0; i <= n_outer; ++i) {
      const double w =
          ((i == 0 || i == n_outer) ? 1.0 : (i % 2 ? 4.0 : 2.0)) * (T / n_outer) / 3;
      const double t = i * (T / n_outer);
      const double au = lam * y[i * stride];
      iau += w * au * au;
      iut += w * (phi(t) - au) * (phi(t) - au);
    }
    const int nfi = 4096;
    for (int i = 0; i <= nfi; ++i)
      iff += ((i == 0 || i == nfi) ? 1.0 : (i % 2 ? 4.0 : 2.0)) * (T / nfi) / 3 *
             phi(i * T / nfi) * phi(i * T / nfi);
    return (std::sqrt(iau) + std::sqrt(iut)) / std::sqrt(iff);
  };

  bool oracle_ok = true;
  std::string oracle_msg;
  for (const auto& level : rep.summary["levels"]) {
    const int l = level["level"].get<int>();
    const double lam2 = level["lambda2"].get<double>();
    const double lam_max = level["lambda_max"].get<double>();
    const double o2 = scalar_ratio(lam2, [](double) { return 1.0; });
    const double ohi = scalar_ratio(lam_max, [T](double t) {
      const double s = std::sin(0.5 * kPi * t / T);
      return s * s;
    });
    double r2 = 0, rhi = 0;
    for (const auto& row : rep.rows) {
      if (static_cast<int>(row[0]) != l || static_cast<int>(row[3]) != 2) continue;
      if (static_cast<int>(row[2]) == 2) r2 = row[4];
      if (static_cast<int>(row[2]) == 3) rhi = row[4];
    }
    if (std::abs(r2 - o2) > 0.01 * o2 || std::abs(rhi - ohi) > 0.01 * ohi)
      oracle_ok = false;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "; L%d oracle mode2 %.4f vs %.4f, highmode %.4f vs %.4f", l,
                  r2, o2, rhi, ohi);
    oracle_msg += buf;
  }
  if (!oracle_ok) o.pass = false;
  o.detail += oracle_msg + (oracle_ok ? " (within 1%)" : " (OUTSIDE 1%)");
  return o;
}

// --- criterion 7: asymptotic Galerkin orthogonality --------------------------

Outcome criterion7(bool) {
  const Config disk_cfg = Config::parse(R"(
[galerkin]
domain = disk
disk.radius = 1.0
k = 1
h0 = 0.4
levels = 3
T = 0.25
dt_rule = 0.5*h
solution = u1
slope_min = 1.5
)");
  const Report disk_rep = run_galerkin(disk_cfg, 0);
  Outcome o = from_report(disk_rep);

  const Config square_cfg = Config::parse(R"(
[galerkin]
domain = square
square.side = 2.0
k = 1
h0 = 0.4
levels = 2
T = 0.25
dt_rule = 0.5*h
solution = u1
)");
  const Report square_rep = run_galerkin(square_cfg, 0);
  const Outcome so = from_report(square_rep);
  if (!so.pass) o.pass = false;
  o.detail += "; square: " + so.detail;
  return o;
}

// --- criterion 8 (stretch): Green's-function L1 bounds -----------------------

Outcome criterion8(bool quick) {
  const Config cfg = Config::parse(R"(
[green]
domain = disk
disk.radius = 1.0
k = 1
h0 = 0.2
levels = 3
T = 0.25
dt_rule = 0.25*h
C_star = 1.0
)");
  const Report rep = run_green(cfg, 0, quick ? 2 : -1);
  Outcome o = from_report(rep);
  char buf[120];
  std::snprintf(buf, sizeof buf, "; slopes ||F|| %.3f, ||F_t|| %.3f [stretch]",
                rep.summary["f_l1w11_slope"].get<double>(),
                rep.summary["ft_l1_slope"].get<double>());
  o.detail += buf;
  return o;
}

// --- criterion 9: infrastructure property suite -------------------------------

Outcome criterion9(bool quick) {
  Outcome o;
  o.pass = true;
  std::string msg;
  const auto fail = [&](const std::string& what) {
    o.pass = false;
    msg += (msg.empty() ? "" : "; ") + what;
  };

  // quadrature exactness against the closed-form monomial integrals
  for (int deg = 1; deg <= 10; ++deg) {
    const QuadRuleTri rule = triangle_quadrature(deg);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        double exact_num = 1, exact_den = 1;
        for (int i = 2; i <= a; ++i) exact_num *= i;
        for (int i = 2; i <= b; ++i) exact_num *= i;
        for (int i = 2; i <= a + b + 2; ++i) exact_den *= i;
        double v = 0;
        for (std::size_t q = 0; q < rule.points.size(); ++q)
          v += rule.weights[q] * std::pow(rule.points[q].x, a) *
               std::pow(rule.points[q].y, b);
        if (std::abs(v - exact_num / exact_den) > 1e-12)
          fail("quadrature exactness at degree " + std::to_string(deg));
      }
  }

  // P1 closed forms on the unit right triangle
  {
    Mesh m;
    m.domain = SmoothDomain::square(4);
    m.vertices = {{0, 0}, {1, 0}, {0, 1}};
    m.boundary_param = {0, 0, 0};
    m.triangles = {{0, 1, 2}};
    m.neighbors = {{-1, -1, -1}};
    m.h_max = m.h_min = std::sqrt(2.0);
    FeSpace sp(m, 1);
    const SparseMatrix M = assemble_mass(sp);
    const SparseMatrix K = assemble_form(sp);
    const double Mref[3][3] = {{2, 1, 1}, {1, 2, 1}, {1, 1, 2}};
    const double Sref[3][3] = {{2, -1, -1}, {-1, 1, 0}, {-1, 0, 1}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (std::abs(M.coeff(i, j) - Mref[i][j] / 24.0) > 1e-13)
          fail("P1 mass closed form");
        if (std::abs(K.coeff(i, j) - (0.5 * Sref[i][j] + Mref[i][j] / 24.0)) >
            1e-13)
          fail("P1 form closed form");
      }
  }

  // K 1 = M 1, eigenvalue floor, mesh conditions, Euler formula
  {
    const Mesh mesh = build_mesh(SmoothDomain::star(2, 0.2, 3), 0.15);
    FeSpace sp(mesh, 2);
    const SparseMatrix M = assemble_mass(sp);
    const SparseMatrix K = assemble_form(sp);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sp.num_dofs());
    if ((K * ones - M * ones).cwiseAbs().maxCoeff() > 1e-12)
      fail("K 1 != M 1");
  }
  for (const SmoothDomain& dom :
       {SmoothDomain::disk(1), SmoothDomain::star(2, 0.2, 3)}) {
    const Mesh mesh = build_mesh(dom, 0.15);
    std::unordered_map<std::uint64_t, int> edges;
    for (const auto& t : mesh.triangles)
      for (int k = 0; k < 3; ++k)
        edges[detail::Triangulation::edge_key(t[k], t[(k + 1) % 3])]++;
    if (mesh.num_vertices() - static_cast<int>(edges.size()) +
            mesh.num_triangles() != 1)
      fail("Euler formula");
    for (const BoundaryEdge& e : mesh.boundary_edges) {
      if (edges.at(detail::Triangulation::edge_key(e.a, e.b)) != 1)
        fail("boundary edge conformity");
      for (int v : {e.a, e.b})
        if (dist(mesh.vertices[v],
                 boundary_point(dom, mesh.boundary_param[v])) > 1e-12)
          fail("boundary vertex off the curve");
    }
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto& tr = mesh.triangles[t];
      const Vec2 c = (mesh.vertices[tr[0]] + mesh.vertices[tr[1]] +
                      mesh.vertices[tr[2]]) / 3.0;
      bool meets = inside(dom, c);
      for (int k = 0; k < 3 && !meets; ++k)
        meets = inside(dom, 0.5 * (c + mesh.vertices[tr[k]]));
      if (!meets) fail("triangle misses Omega");
      if (mesh.min_angle_deg(t) < 25.0) fail("angle floor");
    }
    if (mesh.h_max / mesh.h_min > 4.0) fail("quasi-uniformity cap");
  }

  // eigenvalue floor and CG vs dense oracle
  {
    FeSpace sp(build_mesh(SmoothDomain::disk(1), 0.2), 1);
    const SparseMatrix M = assemble_mass(sp);
    const SparseMatrix K = assemble_form(sp);
    const EigenBasis eb(M, K);
    if (eb.eigenvalues()[0] < 1.0 - 1e-10) fail("lambda_min < 1 - 1e-10");

    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    Eigen::MatrixXd B(10, 10);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) B(i, j) = g(rng);
    const Eigen::MatrixXd A =
        B * B.transpose() + Eigen::MatrixXd::Identity(10, 10);
    SparseMatrix As;
    As.n = 10;
    As.row_ptr.resize(11);
    for (int i = 0; i <= 10; ++i) As.row_ptr[i] = 10 * i;
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        As.col_idx.push_back(j);
        As.vals.push_back(A(i, j));
      }
    Eigen::VectorXd rhs(10);
    for (int i = 0; i < 10; ++i) rhs[i] = g(rng);
    if ((solve_spd(As, rhs, 1e-12) - A.ldlt().solve(rhs)).norm() > 1e-8)
      fail("CG vs dense oracle");
  }

  // disk Neumann eigenvalue at h = 0.05 within 5%
  {
    const double h = quick ? 0.1 : 0.05;
    FeSpace sp(build_mesh(SmoothDomain::disk(1), h), 1);
    const SparseMatrix M = assemble_mass(sp);
    const SparseMatrix K = assemble_form(sp);
    const EigenBasis eb(M, K, 4000);
    double root = 1.8;  // J_1' root by Newton, independent of the FEM path
    for (int it = 0; it < 60; ++it) {
      const double x = root;
      const double j1 = std::cyl_bessel_j(1, x);
      const double j0 = std::cyl_bessel_j(0, x);
      root -= (j0 - j1 / x) / (-j1 - (j0 * x - 2 * j1) / (x * x));
    }
    const double lam2 = 1.0 + root * root;
    char buf[120];
    std::snprintf(buf, sizeof buf, "disk lambda_2 %.4f vs %.4f at h=%.2f",
                  eb.eigenvalues()[1], lam2, h);
    msg += std::string(msg.empty() ? "" : "; ") + buf;
    if (std::abs(eb.eigenvalues()[1] - lam2) > 0.05 * lam2)
      fail("disk lambda_2 outside 5%");
  }

  o.detail = msg.empty() ? "all infrastructure properties hold" : msg;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  int only = -1;
  bool quick = false;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc)
      only = std::atoi(argv[++i]);
    else if (!std::strcmp(argv[i], "--quick"))
      quick = true;
  }

  const std::vector<std::pair<std::string, std::function<Outcome(bool)>>> crits = {
      {"rate cap: k=2 on the non-convex star stays second order", criterion1},
      {"k=1 rate on the disk is second order up to the log factor", criterion2},
      {"boundary-skin geometric scalings and 16-gon closed forms", criterion3},
      {"regularized delta: moments, sup-norm scaling, envelope decay", criterion4},
      {"discrete-semigroup smoothing tables", criterion5},
      {"discrete maximal regularity ratios", criterion6},
      {"asymptotic Galerkin orthogonality residual", criterion7},
      {"Green's-function L1 bounds (stretch)", criterion8},
      {"infrastructure property suite", criterion9},
  };

  int failures = 0;
  for (std::size_t i = 0; i < crits.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (only > 0 && only != id) continue;
    Outcome o;
    try {
      o = crits[i].second(quick);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s -- %s\n", o.pass ? "PASS" : "FAIL", id,
                crits[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
