#pragma once

// Quadrature rules: Gauss-Legendre on [0,1] for edges, and collapsed
// (Duffy-type) tensor rules on the reference triangle {x,y>=0, x+y<=1}.
// The collapsed construction is exact for any requested polynomial degree
// and keeps every weight positive.

#include <cmath>
#include <vector>

#include "skinfem/core.hpp"

namespace skinfem {

struct QuadRule1D {
  std::vector<double> points;   // in [0,1]
  std::vector<double> weights;  // sum to 1
};

struct QuadRuleTri {
  std::vector<Vec2> points;     // in the reference triangle
  std::vector<double> weights;  // sum to 1/2
};

namespace detail {

// n-point Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-based initial guess.
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Evaluate P_n(t) and P_n'(t) by the three-term recurrence.
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double step = p1 / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace detail

/// Gauss points/weights on [0,1] exact for polynomials of the given degree.
inline QuadRule1D edge_quadrature(int degree) {
  if (degree < 0 || degree > 60) throw UnsupportedDegree("edge degree " + std::to_string(degree));
  const int n = std::max(1, (degree + 2) / 2);
  std::vector<double> x, w;
  detail::gauss_legendre(n, x, w);
  QuadRule1D r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.points[i] = 0.5 * (x[i] + 1.0);
    r.weights[i] = 0.5 * w[i];
  }
  return r;
}

/// Positive-weight rule on the reference triangle exact for total degree
/// <= degree. Built as a collapsed tensor Gauss rule: (x,y) = (u, v(1-u)),
/// so x^a y^b pulls back to u^a v^b (1-u)^{b+1}, a polynomial of degree
/// <= degree+1 in each variable.
inline QuadRuleTri triangle_quadrature(int degree) {
  if (degree < 0 || degree > 30)
    throw UnsupportedDegree("triangle degree " + std::to_string(degree));
  const int n = std::max(1, (degree + 3) / 2);  // 2n-1 >= degree+1
  std::vector<double> x, w;
  detail::gauss_legendre(n, x, w);
  QuadRuleTri r;
  r.points.reserve(n * n);
  r.weights.reserve(n * n);
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (x[i] + 1.0), wu = 0.5 * w[i];
    for (int j = 0; j < n; ++j) {
      const double v = 0.5 * (x[j] + 1.0), wv = 0.5 * w[j];
      r.points.push_back({u, v * (1.0 - u)});
      r.weights.push_back(wu * wv * (1.0 - u));
    }
  }
  return r;
}

}  // namespace skinfem
