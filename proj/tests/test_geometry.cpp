#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "skinfem/geometry.hpp"

using namespace skinfem;

TEST_CASE("boundary points of the built-ins") {
  CHECK(boundary_point(SmoothDomain::disk(1), 0.0).x == Catch::Approx(1.0));
  CHECK(boundary_point(SmoothDomain::disk(1), 0.0).y == Catch::Approx(0.0).margin(1e-15));
  const Vec2 e = boundary_point(SmoothDomain::ellipse(2, 1), kPi / 2);
  CHECK(e.x == Catch::Approx(0.0).margin(1e-12));
  CHECK(e.y == Catch::Approx(1.0));
  const Vec2 s = boundary_point(SmoothDomain::star(1, 0.3, 5), 0.0);
  CHECK(s.x == Catch::Approx(1.3));
  CHECK(s.y == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("boundary parametrization is periodic") {
  for (const SmoothDomain& d :
       {SmoothDomain::disk(1), SmoothDomain::ellipse(2, 1),
        SmoothDomain::star(1, 0.3, 5), SmoothDomain::square(2)}) {
    for (double th : {0.1, 1.7, 4.0}) {
      const Vec2 a = boundary_point(d, th);
      const Vec2 b = boundary_point(d, th + 2 * kPi);
      CHECK(dist(a, b) < 1e-12);
    }
  }
}

TEST_CASE("outward normal: unit, orthogonal, outward") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> th(0, 2 * kPi);
  for (const SmoothDomain& d :
       {SmoothDomain::disk(1), SmoothDomain::ellipse(2, 1),
        SmoothDomain::star(1, 0.3, 5)}) {
    for (int i = 0; i < 50; ++i) {
      const double t = th(rng);
      const Vec2 n = outward_normal(d, t);
      CHECK(std::abs(n.norm() - 1.0) < 1e-12);
      CHECK(std::abs(n.dot(boundary_tangent(d, t))) <
            1e-10 * boundary_tangent(d, t).norm());
      // outward for star-shaped domains: positive against the position vector
      CHECK(n.dot(boundary_point(d, t)) > 0);
    }
  }
  const Vec2 n = outward_normal(SmoothDomain::disk(1), kPi / 3);
  CHECK(n.x == Catch::Approx(0.5));
  CHECK(n.y == Catch::Approx(std::sqrt(3.0) / 2));
  const Vec2 ne = outward_normal(SmoothDomain::ellipse(2, 1), 0.0);
  CHECK(ne.x == Catch::Approx(1.0));
  CHECK(ne.y == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("inside tests") {
  CHECK(inside(SmoothDomain::disk(1), {0.5, 0}));
  CHECK_FALSE(inside(SmoothDomain::disk(1), {1.5, 0}));
  CHECK(inside(SmoothDomain::star(1, 0.3, 5), {1.2, 0}));
  CHECK(inside(SmoothDomain::square(2), {0.9, -0.9}));
  CHECK_FALSE(inside(SmoothDomain::square(2), {1.1, 0}));
}

TEST_CASE("closest point on the disk") {
  const SmoothDomain d = SmoothDomain::disk(1);
  ClosestPoint cp = closest_point(d, {2, 0});
  CHECK(cp.theta == Catch::Approx(0.0).margin(1e-10));
  CHECK(cp.foot.x == Catch::Approx(1.0));
  CHECK(cp.t == Catch::Approx(1.0));
  cp = closest_point(d, {0.5, 0});
  CHECK(cp.foot.x == Catch::Approx(1.0));
  CHECK(cp.t == Catch::Approx(-0.5));
}

TEST_CASE("closest point against a brute-force parameter scan") {
  const SmoothDomain d = SmoothDomain::ellipse(2, 1);
  const Vec2 x{1.9, 0.3};
  const ClosestPoint cp = closest_point(d, x);
  // 2048-point scan refined by ternary bisection
  double best_th = 0, best_d = 1e300;
  for (int i = 0; i < 2048; ++i) {
    const double th = 2 * kPi * i / 2048;
    const double dd = dist(x, boundary_point(d, th));
    if (dd < best_d) { best_d = dd; best_th = th; }
  }
  double lo = best_th - 2 * kPi / 2048, hi = best_th + 2 * kPi / 2048;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (dist(x, boundary_point(d, m1)) < dist(x, boundary_point(d, m2))) hi = m2;
    else lo = m1;
  }
  const double oracle_th = 0.5 * (lo + hi);
  CHECK(std::abs(cp.theta - oracle_th) < 1e-8);
  CHECK(dist(cp.foot, boundary_point(d, oracle_th)) < 1e-8);
}

TEST_CASE("closest point round trip near the boundary") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uth(0, 2 * kPi), ud(-0.01, 0.01);
  for (const SmoothDomain& d :
       {SmoothDomain::disk(1), SmoothDomain::ellipse(2, 1),
        SmoothDomain::star(1, 0.3, 5)}) {
    for (int i = 0; i < 1000; ++i) {
      const double th = uth(rng), off = ud(rng);
      const Vec2 x = boundary_point(d, th) + off * outward_normal(d, th);
      const ClosestPoint cp = closest_point(d, x);
      double dth = std::abs(cp.theta - th);
      dth = std::min(dth, 2 * kPi - dth);
      CHECK(dth < 1e-8);
      CHECK(std::abs(cp.t - off) < 1e-10);
      // reconstruction x = foot + t n
      const Vec2 rec = cp.foot + cp.t * outward_normal(d, cp.theta);
      CHECK(dist(rec, x) < 1e-10);
    }
  }
}

TEST_CASE("|t*| equals the sampled distance to the boundary") {
  const SmoothDomain d = SmoothDomain::star(1, 0.3, 5);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uth(0, 2 * kPi), ud(-0.02, 0.02);
  for (int i = 0; i < 50; ++i) {
    const double th = uth(rng), off = ud(rng);
    const Vec2 x = boundary_point(d, th) + off * outward_normal(d, th);
    const ClosestPoint cp = closest_point(d, x);
    double sampled = 1e300, chord = 0;
    for (int j = 0; j < 4096; ++j) {
      const double t2 = 2 * kPi * j / 4096;
      sampled = std::min(sampled, dist(x, boundary_point(d, t2)));
      chord = std::max(chord, dist(boundary_point(d, t2),
                                   boundary_point(d, t2 + 2 * kPi / 4096)));
    }
    CHECK(std::abs(cp.t) <= sampled + 1e-12);
    CHECK(std::abs(std::abs(cp.t) - sampled) < 2 * chord);
  }
}

TEST_CASE("normal is the gradient of the signed offset") {
  const SmoothDomain d = SmoothDomain::ellipse(2, 1);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uth(0, 2 * kPi), ud(-0.01, 0.01);
  for (int i = 0; i < 100; ++i) {
    const double th = uth(rng), off = ud(rng);
    const Vec2 x = boundary_point(d, th) + off * outward_normal(d, th);
    const double eps = 1e-6;
    const auto sdist = [&](const Vec2& p) { return closest_point(d, p).t; };
    const Vec2 g{(sdist({x.x + eps, x.y}) - sdist({x.x - eps, x.y})) / (2 * eps),
                 (sdist({x.x, x.y + eps}) - sdist({x.x, x.y - eps})) / (2 * eps)};
    const Vec2 n = outward_normal(d, closest_point(d, x).theta);
    CHECK(dist(g, n) < 1e-5);
  }
}

TEST_CASE("projection refuses ambiguous points") {
  // the disk center is equidistant from the whole boundary
  CHECK_THROWS_AS(closest_point(SmoothDomain::disk(1), {0, 0}), NotUnique);
}

TEST_CASE("arclength table") {
  ArclengthTable disk_table(SmoothDomain::disk(1), 128);
  CHECK(disk_table.total_length() == Catch::Approx(2 * kPi).epsilon(1e-12));
  CHECK(disk_table.theta_at(kPi) == Catch::Approx(kPi).epsilon(1e-10));

  // complete elliptic integral value, cross-checked by doubling resolution
  ArclengthTable e1(SmoothDomain::ellipse(2, 1), 256);
  ArclengthTable e2(SmoothDomain::ellipse(2, 1), 512);
  CHECK(e1.total_length() == Catch::Approx(9.68844822054768).epsilon(1e-9));
  CHECK(std::abs(e1.total_length() - e2.total_length()) < 1e-10 * e1.total_length());

  // inverse lookup is monotone
  ArclengthTable st(SmoothDomain::star(1, 0.3, 5), 256);
  double prev = -1;
  for (int i = 0; i <= 64; ++i) {
    const double th = st.theta_at(st.total_length() * i / 64.9999);
    CHECK(th >= prev - 1e-12);
    prev = th;
  }
}

TEST_CASE("domain guards") {
  CHECK_THROWS_AS(SmoothDomain::star(1, 1.1, 3), InvalidDomain);
  CHECK_THROWS_AS(SmoothDomain::disk(-1), InvalidDomain);
  CHECK_THROWS_AS(SmoothDomain::ellipse(1, -2), InvalidDomain);
}

TEST_CASE("analytic areas") {
  CHECK(domain_area(SmoothDomain::disk(1)) == Catch::Approx(kPi));
  CHECK(domain_area(SmoothDomain::star(1, 0.3, 5)) ==
        Catch::Approx(kPi * (1 + 0.045)));
  CHECK(domain_area(SmoothDomain::square(2)) == Catch::Approx(4.0));
}
