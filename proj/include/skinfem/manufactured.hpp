#pragma once

// Manufactured solutions: globally smooth closed forms u(x,t), with
// f = u_t - Lap u + u and Neumann data g(x,t) = grad u(x,t) . n(pi(x))
// derived analytically. The global formula is its own extension.

#include <cmath>
#include <functional>
#include <string>

#include "skinfem/assemble.hpp"
#include "skinfem/core.hpp"
#include "skinfem/geometry.hpp"

namespace skinfem {

struct ManufacturedSolution {
  std::string name;
  std::function<double(const Vec2&, double)> value;
  std::function<Vec2(const Vec2&, double)> grad;
  std::function<double(const Vec2&, double)> dt;
  std::function<double(const Vec2&, double)> laplacian;

  ScalarField as_field() const { return {value, grad}; }

  /// f = u_t - Lap u + u.
  ScalarField f_field() const {
    return {[this](const Vec2& x, double t) {
              return dt(x, t) - laplacian(x, t) + value(x, t);
            },
            {}};
  }

  /// g(x,t) = grad u(x,t) . n(pi(x)); evaluated on boundary-edge quadrature
  /// points of the polygon.
  ScalarField g_field(const SmoothDomain& domain) const {
    return {[this, domain](const Vec2& x, double t) {
              const ClosestPoint cp = closest_point(domain, x);
              return grad(x, t).dot(outward_normal(domain, cp.theta));
            },
            {}};
  }

  ScalarField initial_field() const {
    return {[this](const Vec2& x, double) { return value(x, 0.0); },
            [this](const Vec2& x, double) { return grad(x, 0.0); }};
  }
};

/// u1 = e^{-t} sin(x1) sin(x2); Lap u = -2u, so f = 2u.
inline ManufacturedSolution manufactured_u1() {
  ManufacturedSolution s;
  s.name = "u1";
  s.value = [](const Vec2& x, double t) {
    return std::exp(-t) * std::sin(x.x) * std::sin(x.y);
  };
  s.grad = [](const Vec2& x, double t) {
    const double e = std::exp(-t);
    return Vec2{e * std::cos(x.x) * std::sin(x.y),
                e * std::sin(x.x) * std::cos(x.y)};
  };
  s.dt = [](const Vec2& x, double t) {
    return -std::exp(-t) * std::sin(x.x) * std::sin(x.y);
  };
  s.laplacian = [](const Vec2& x, double t) {
    return -2.0 * std::exp(-t) * std::sin(x.x) * std::sin(x.y);
  };
  return s;
}

/// u2 = (1+t)(x1^2 + x2^2)/4; polynomial in space, strong Neumann data.
inline ManufacturedSolution manufactured_u2() {
  ManufacturedSolution s;
  s.name = "u2";
  s.value = [](const Vec2& x, double t) {
    return 0.25 * (1 + t) * x.squared_norm();
  };
  s.grad = [](const Vec2& x, double t) {
    return Vec2{0.5 * (1 + t) * x.x, 0.5 * (1 + t) * x.y};
  };
  s.dt = [](const Vec2& x, double) { return 0.25 * x.squared_norm(); };
  s.laplacian = [](const Vec2&, double t) { return 1.0 + t; };
  return s;
}

inline ManufacturedSolution manufactured_by_name(const std::string& name) {
  if (name == "u1") return manufactured_u1();
  if (name == "u2") return manufactured_u2();
  throw ConfigError("unknown manufactured solution: " + name);
}

}  // namespace skinfem
