#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "skinfem/quadrature.hpp"

using namespace skinfem;

namespace {

// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!.
double monomial_integral(int a, int b) {
  double num = 1, den = 1;
  for (int i = 2; i <= a; ++i) num *= i;
  for (int i = 2; i <= b; ++i) num *= i;
  for (int i = 2; i <= a + b + 2; ++i) den *= i;
  return num / den;
}

}  // namespace

TEST_CASE("triangle rules: positivity, area, advertised exactness") {
  for (int degree = 0; degree <= 10; ++degree) {
    const QuadRuleTri rule = triangle_quadrature(degree);
    double sum = 0;
    for (double w : rule.weights) {
      CHECK(w > 0);
      sum += w;
    }
    CHECK(sum == Catch::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a + 0 <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) {
        double val = 0;
        for (std::size_t q = 0; q < rule.points.size(); ++q)
          val += rule.weights[q] * std::pow(rule.points[q].x, a) *
                 std::pow(rule.points[q].y, b);
        CHECK(val == Catch::Approx(monomial_integral(a, b)).epsilon(1e-12));
      }
  }
}

TEST_CASE("triangle rule closed-form spot checks") {
  const QuadRuleTri rule = triangle_quadrature(3);
  double one = 0, x = 0, x2y = 0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    one += rule.weights[q];
    x += rule.weights[q] * rule.points[q].x;
    x2y += rule.weights[q] * rule.points[q].x * rule.points[q].x * rule.points[q].y;
  }
  CHECK(one == Catch::Approx(0.5));
  CHECK(x == Catch::Approx(1.0 / 6));
  CHECK(x2y == Catch::Approx(1.0 / 60));  // 2! 1! / 5!
}

TEST_CASE("edge rules") {
  for (int degree = 0; degree <= 12; ++degree) {
    const QuadRule1D rule = edge_quadrature(degree);
    double sum = 0;
    for (double w : rule.weights) sum += w;
    CHECK(sum == Catch::Approx(1.0).epsilon(1e-14));
    for (int p = 0; p <= degree; ++p) {
      double val = 0;
      for (std::size_t q = 0; q < rule.points.size(); ++q)
        val += rule.weights[q] * std::pow(rule.points[q], p);
      CHECK(val == Catch::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
  }
  // 3-point Gauss integrates s^4 exactly
  const QuadRule1D g3 = edge_quadrature(5);
  REQUIRE(g3.points.size() == 3);
  double s4 = 0;
  for (std::size_t q = 0; q < 3; ++q)
    s4 += g3.weights[q] * std::pow(g3.points[q], 4);
  CHECK(s4 == Catch::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("unsupported degrees are rejected") {
  CHECK_THROWS_AS(triangle_quadrature(-1), UnsupportedDegree);
  CHECK_THROWS_AS(triangle_quadrature(31), UnsupportedDegree);
  CHECK_THROWS_AS(edge_quadrature(-2), UnsupportedDegree);
}
