#pragma once

// Exact description of the smooth domain Omega: boundary parametrization,
// outward normals, inside tests, and the closest-point projection pi with its
// signed normal offset t* (positive outside Omega). Built-in boundaries are
// the disk, an axis-aligned ellipse, a polar star r(theta)=R(1+a cos m theta),
// and an axis-aligned square used as an exactly-representable debug domain.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "skinfem/core.hpp"

namespace skinfem {

enum class DomainKind { Disk, Ellipse, Star, Square };

struct SmoothDomain {
  DomainKind kind = DomainKind::Disk;
  double radius = 0.5;        // disk
  double a = 0.5, b = 0.25;   // ellipse semi-axes
  double base_radius = 0.35;  // star
  double amplitude = 0.0;     // star
  int frequency = 1;          // star
  double side = 1.0;          // square (debug)
  double param_period = 2.0 * kPi;

  static SmoothDomain disk(double r) {
    SmoothDomain d; d.kind = DomainKind::Disk; d.radius = r;
    if (r <= 0) throw InvalidDomain("disk radius must be positive");
    return d;
  }
  static SmoothDomain ellipse(double a, double b) {
    SmoothDomain d; d.kind = DomainKind::Ellipse; d.a = a; d.b = b;
    if (a <= 0 || b <= 0) throw InvalidDomain("ellipse semi-axes must be positive");
    return d;
  }
  static SmoothDomain star(double R, double amp, int m) {
    SmoothDomain d; d.kind = DomainKind::Star;
    d.base_radius = R; d.amplitude = amp; d.frequency = m;
    // r(theta) > 0 keeps the polar curve closed and simple.
    if (R <= 0 || m < 1 || amp < 0 || amp >= 1.0)
      throw InvalidDomain("star requires R>0, m>=1, 0<=a<1");
    return d;
  }
  static SmoothDomain square(double side) {
    SmoothDomain d; d.kind = DomainKind::Square; d.side = side;
    if (side <= 0) throw InvalidDomain("square side must be positive");
    return d;
  }
};

namespace detail {

inline double star_r(const SmoothDomain& d, double t) {
  return d.base_radius * (1.0 + d.amplitude * std::cos(d.frequency * t));
}
inline double star_dr(const SmoothDomain& d, double t) {
  return -d.base_radius * d.amplitude * d.frequency * std::sin(d.frequency * t);
}
inline double star_ddr(const SmoothDomain& d, double t) {
  return -d.base_radius * d.amplitude * d.frequency * d.frequency *
         std::cos(d.frequency * t);
}

// Square parametrized by arclength fraction, starting at the right edge
// midpoint (S/2, 0) and walking CCW. Corners sit at s = (2j+1)S/2.
inline Vec2 square_point(double side, double s /* in [0, 4*side) */) {
  const double S = side, hs = 0.5 * S;
  double u = std::fmod(s, 4.0 * S);
  if (u < 0) u += 4.0 * S;
  u += hs;  // shift so segment boundaries align with corners
  const int edge = static_cast<int>(std::floor(u / S)) % 4;
  const double w = u - std::floor(u / S) * S;  // position along edge in [0,S)
  switch (edge) {
    case 0: return {hs, -hs + w};        // right edge, upward
    case 1: return {hs - w, hs};         // top edge, leftward
    case 2: return {-hs, hs - w};        // left edge, downward
    default: return {-hs + w, -hs};      // bottom edge, rightward
  }
}

inline Vec2 square_tangent(double side, double s) {
  const double S = side;
  double u = std::fmod(s, 4.0 * S);
  if (u < 0) u += 4.0 * S;
  u += 0.5 * S;
  const int edge = static_cast<int>(std::floor(u / S)) % 4;
  switch (edge) {
    case 0: return {0, 1};
    case 1: return {-1, 0};
    case 2: return {0, -1};
    default: return {1, 0};
  }
}

}  // namespace detail

/// Point on the boundary at parameter theta (wraps modulo the period).
inline Vec2 boundary_point(const SmoothDomain& d, double theta) {
  switch (d.kind) {
    case DomainKind::Disk:
      return {d.radius * std::cos(theta), d.radius * std::sin(theta)};
    case DomainKind::Ellipse:
      return {d.a * std::cos(theta), d.b * std::sin(theta)};
    case DomainKind::Star: {
      const double r = detail::star_r(d, theta);
      return {r * std::cos(theta), r * std::sin(theta)};
    }
    case DomainKind::Square: {
      const double s = theta / d.param_period * (4.0 * d.side);
      return detail::square_point(d.side, s);
    }
  }
  return {};
}

/// d(gamma)/d(theta).
inline Vec2 boundary_tangent(const SmoothDomain& d, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  switch (d.kind) {
    case DomainKind::Disk:
      return {-d.radius * s, d.radius * c};
    case DomainKind::Ellipse:
      return {-d.a * s, d.b * c};
    case DomainKind::Star: {
      const double r = detail::star_r(d, theta), dr = detail::star_dr(d, theta);
      return {dr * c - r * s, dr * s + r * c};
    }
    case DomainKind::Square: {
      const double sp = theta / d.param_period * (4.0 * d.side);
      return detail::square_tangent(d.side, sp) * (4.0 * d.side / d.param_period);
    }
  }
  return {};
}

/// d^2(gamma)/d(theta)^2. Undefined at square corners (returns zero there).
inline Vec2 boundary_second(const SmoothDomain& d, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  switch (d.kind) {
    case DomainKind::Disk:
      return {-d.radius * c, -d.radius * s};
    case DomainKind::Ellipse:
      return {-d.a * c, -d.b * s};
    case DomainKind::Star: {
      const double r = detail::star_r(d, theta), dr = detail::star_dr(d, theta),
                   ddr = detail::star_ddr(d, theta);
      return {(ddr - r) * c - 2.0 * dr * s, (ddr - r) * s + 2.0 * dr * c};
    }
    case DomainKind::Square:
      return {0, 0};
  }
  return {};
}

/// Outward unit normal at parameter theta.
inline Vec2 outward_normal(const SmoothDomain& d, double theta) {
  return boundary_tangent(d, theta).rot_cw().normalized();
}

/// Open-set membership test.
inline bool inside(const SmoothDomain& d, const Vec2& x) {
  switch (d.kind) {
    case DomainKind::Disk:
      return x.squared_norm() < d.radius * d.radius;
    case DomainKind::Ellipse: {
      const double u = x.x / d.a, v = x.y / d.b;
      return u * u + v * v < 1.0;
    }
    case DomainKind::Star: {
      const double phi = std::atan2(x.y, x.x);
      const double r = detail::star_r(d, phi);
      return x.squared_norm() < r * r;
    }
    case DomainKind::Square:
      return std::max(std::abs(x.x), std::abs(x.y)) < 0.5 * d.side;
  }
  return false;
}

/// Analytic area of Omega.
inline double domain_area(const SmoothDomain& d) {
  switch (d.kind) {
    case DomainKind::Disk:
      return kPi * d.radius * d.radius;
    case DomainKind::Ellipse:
      return kPi * d.a * d.b;
    case DomainKind::Star: {
      // (1/2) int r(theta)^2 dtheta = pi R^2 (1 + a^2/2)
      const double R = d.base_radius, a = d.amplitude;
      return kPi * R * R * (1.0 + 0.5 * a * a);
    }
    case DomainKind::Square:
      return d.side * d.side;
  }
  return 0.0;
}

struct ClosestPoint {
  double theta = 0.0;  // parameter of the foot point on the boundary
  Vec2 foot;           // gamma(theta)
  double t = 0.0;      // signed offset: x = foot + t * n(theta); t > 0 outside
};

namespace detail {

inline ClosestPoint closest_point_square(const SmoothDomain& d, const Vec2& x) {
  const double hs = 0.5 * d.side;
  // Candidate feet: projections onto the four edges (clamped).
  ClosestPoint best;
  double best_d2 = std::numeric_limits<double>::max();
  struct Edge { Vec2 a, b; double s0; };  // s0 = arclength at a
  const double S = d.side;
  const Edge edges[4] = {
      {{hs, -hs}, {hs, hs}, -0.5 * S},   // right (starts half-edge before s=0)
      {{hs, hs}, {-hs, hs}, 0.5 * S},    // top
      {{-hs, hs}, {-hs, -hs}, 1.5 * S},  // left
      {{-hs, -hs}, {hs, -hs}, 2.5 * S},  // bottom
  };
  for (const Edge& e : edges) {
    const Vec2 ab = e.b - e.a;
    double lam = (x - e.a).dot(ab) / ab.squared_norm();
    lam = std::clamp(lam, 0.0, 1.0);
    const Vec2 foot = e.a + lam * ab;
    const double d2 = (x - foot).squared_norm();
    if (d2 < best_d2) {
      best_d2 = d2;
      double s = e.s0 + lam * S;
      if (s < 0) s += 4.0 * S;
      best.theta = s / (4.0 * S) * d.param_period;
      best.foot = foot;
    }
  }
  const double sd = std::max(std::abs(x.x), std::abs(x.y)) - hs;
  best.t = (sd >= 0) ? std::sqrt(best_d2) : -std::sqrt(best_d2);
  return best;
}

}  // namespace detail

/// Closest-point projection onto the boundary. Newton on the stationarity
/// condition (x - gamma(theta)) . gamma'(theta) = 0, seeded from a 256-point
/// scan; golden-section fallback on the scan's best bracket. Throws NotUnique
/// when the scan sees two competing minima (projection reach exceeded) and
/// NonConvergent when neither Newton nor the fallback reaches tolerance.
inline ClosestPoint closest_point(const SmoothDomain& d, const Vec2& x) {
  if (d.kind == DomainKind::Square) return detail::closest_point_square(d, x);

  constexpr int kScan = 256;
  const double period = d.param_period;
  double dist2[kScan];
  for (int i = 0; i < kScan; ++i) {
    const double th = period * i / kScan;
    dist2[i] = (x - boundary_point(d, th)).squared_norm();
  }
  int best = 0;
  for (int i = 1; i < kScan; ++i)
    if (dist2[i] < dist2[best]) best = i;

  // Reach safeguard: competing local minima of comparable depth far apart in
  // theta mean the projection is ambiguous.
  {
    double d1 = std::numeric_limits<double>::max(), d2v = d1;
    int i1 = -1, i2 = -1;
    for (int i = 0; i < kScan; ++i) {
      const double prev = dist2[(i + kScan - 1) % kScan];
      const double next = dist2[(i + 1) % kScan];
      if (dist2[i] <= prev && dist2[i] <= next) {
        if (dist2[i] < d1) { d2v = d1; i2 = i1; d1 = dist2[i]; i1 = i; }
        else if (dist2[i] < d2v) { d2v = dist2[i]; i2 = i; }
      }
    }
    if (i2 >= 0) {
      const double r1 = std::sqrt(d1), r2 = std::sqrt(d2v);
      double dth = std::abs(i1 - i2) * period / kScan;
      dth = std::min(dth, period - dth);
      if (r2 - r1 <= 0.01 * std::max(r1, 1e-12) && dth > 0.1)
        throw NotUnique("two projection candidates at theta distance " +
                        std::to_string(dth));
    }
  }

  auto stationarity = [&](double th, double* deriv = nullptr) {
    const Vec2 g = boundary_point(d, th);
    const Vec2 gp = boundary_tangent(d, th);
    if (deriv) {
      const Vec2 gpp = boundary_second(d, th);
      *deriv = -gp.squared_norm() + (x - g).dot(gpp);
    }
    return (x - g).dot(gp);
  };

  const double scale = boundary_tangent(d, period * best / kScan).norm() *
                           std::max(std::sqrt(dist2[best]), 1e-6) + 1.0;
  const double tol = 1e-12 * scale;

  double theta = period * best / kScan;
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    double deriv;
    const double res = stationarity(theta, &deriv);
    if (std::abs(res) <= tol) { converged = true; break; }
    if (deriv == 0.0) break;
    theta -= res / deriv;
  }
  const double lo = period * (best - 1) / kScan, hi = period * (best + 1) / kScan;
  if (!converged || theta < lo - 0.5 * period / kScan || theta > hi + 0.5 * period / kScan) {
    // Golden-section on the scan bracket.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = (x - boundary_point(d, c1)).squared_norm();
    double f2 = (x - boundary_point(d, c2)).squared_norm();
    for (int it = 0; it < 200 && (b - a) > 1e-14 * period; ++it) {
      if (f1 < f2) { b = c2; c2 = c1; f2 = f1; c1 = b - gr * (b - a);
                     f1 = (x - boundary_point(d, c1)).squared_norm(); }
      else         { a = c1; c1 = c2; f1 = f2; c2 = a + gr * (b - a);
                     f2 = (x - boundary_point(d, c2)).squared_norm(); }
    }
    theta = 0.5 * (a + b);
    if (std::abs(stationarity(theta)) > 1e6 * tol)
      throw NonConvergent("closest_point stationarity residual too large");
  }

  theta = std::fmod(theta, period);
  if (theta < 0) theta += period;
  ClosestPoint cp;
  cp.theta = theta;
  cp.foot = boundary_point(d, theta);
  cp.t = (x - cp.foot).dot(outward_normal(d, theta));
  return cp;
}

// ---------------------------------------------------------------------------
// Cumulative arclength s(theta) and its monotone inverse, built by composite
// Gauss quadrature of |gamma'| on `resolution` parameter segments.

class ArclengthTable {
 public:
  ArclengthTable(const SmoothDomain& d, int resolution = 2048) : dom_(d) {
    if (resolution < 64) throw InvalidDomain("arclength resolution must be >= 64");
    n_ = resolution;
    cum_.assign(n_ + 1, 0.0);
    // 8-point Gauss-Legendre on [0,1].
    static const double gx[8] = {
        0.01985507175123188, 0.10166676129318664, 0.2372337950418355,
        0.40828267875217505, 0.5917173212478249,  0.7627662049581645,
        0.8983332387068134,  0.9801449282487681};
    static const double gw[8] = {
        0.05061426814518813, 0.11119051722668724, 0.15685332293894364,
        0.18134189168918097, 0.18134189168918097, 0.15685332293894364,
        0.11119051722668724, 0.05061426814518813};
    const double dt = dom_.param_period / n_;
    for (int i = 0; i < n_; ++i) {
      double seg = 0.0;
      for (int q = 0; q < 8; ++q)
        seg += gw[q] * boundary_tangent(dom_, (i + gx[q]) * dt).norm();
      cum_[i + 1] = cum_[i] + seg * dt;
    }
  }

  double total_length() const { return cum_.back(); }

  double theta_at(double s) const {
    const double L = total_length();
    s = std::fmod(s, L);
    if (s < 0) s += L;
    auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    int i = std::clamp(static_cast<int>(it - cum_.begin()) - 1, 0, n_ - 1);
    const double dt = dom_.param_period / n_;
    double th = (i + (s - cum_[i]) / (cum_[i + 1] - cum_[i])) * dt;
    // Newton polish on s(theta) - s = 0 with ds/dtheta = |gamma'|.
    for (int it2 = 0; it2 < 30; ++it2) {
      const double f = arclength_at(th) - s;
      const double df = boundary_tangent(dom_, th).norm();
      const double step = f / df;
      th -= step;
      if (std::abs(step) < 1e-15 * dom_.param_period) break;
    }
    return th;
  }

  double arclength_at(double theta) const {
    const double dt = dom_.param_period / n_;
    double th = std::fmod(theta, dom_.param_period);
    if (th < 0) th += dom_.param_period;
    const int i = std::min(static_cast<int>(th / dt), n_ - 1);
    // Integrate the tail [i*dt, theta] with 8-point Gauss.
    static const double gx[8] = {
        0.01985507175123188, 0.10166676129318664, 0.2372337950418355,
        0.40828267875217505, 0.5917173212478249,  0.7627662049581645,
        0.8983332387068134,  0.9801449282487681};
    static const double gw[8] = {
        0.05061426814518813, 0.11119051722668724, 0.15685332293894364,
        0.18134189168918097, 0.18134189168918097, 0.15685332293894364,
        0.11119051722668724, 0.05061426814518813};
    const double a = i * dt, len = th - a;
    double seg = 0.0;
    for (int q = 0; q < 8; ++q)
      seg += gw[q] * boundary_tangent(dom_, a + gx[q] * len).norm();
    return cum_[i] + seg * len;
  }

  const SmoothDomain& domain() const { return dom_; }

 private:
  SmoothDomain dom_;
  int n_ = 0;
  std::vector<double> cum_;
};

}  // namespace skinfem
