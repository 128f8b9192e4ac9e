#pragma once

// Small shared pieces: 2D vector math and the error taxonomy used across
// the library. Everything is header-only.

#include <cmath>
#include <stdexcept>
#include <string>

namespace skinfem {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double xx, double yy) : x(xx), y(yy) {}

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

  constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  // z-component of the 3D cross product; positive when `o` is CCW from *this.
  constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  constexpr double squared_norm() const { return x * x + y * y; }
  Vec2 normalized() const { const double n = norm(); return {x / n, y / n}; }
  // Rotate by -90 degrees: maps a CCW tangent to the outward normal.
  constexpr Vec2 rot_cw() const { return {y, -x}; }
};

inline constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Signed twice-area of triangle (a,b,c); positive when CCW.
inline double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b - a).cross(c - a);
}

// ---------------------------------------------------------------------------
// Errors. All recoverable failures are exceptions rooted at Error so callers
// can catch per-module or wholesale.

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define SKINFEM_DEFINE_ERROR(NAME)                                   \
  class NAME : public Error {                                        \
   public:                                                           \
    explicit NAME(const std::string& what) : Error(#NAME ": " + what) {} \
  }

SKINFEM_DEFINE_ERROR(NonConvergent);          // closest-point iteration failed
SKINFEM_DEFINE_ERROR(NotUnique);              // projection reach exceeded
SKINFEM_DEFINE_ERROR(InvalidDomain);          // domain parameters rejected
SKINFEM_DEFINE_ERROR(MeshQualityFailure);     // refinement could not reach quality
SKINFEM_DEFINE_ERROR(TooCoarse);              // h_target too large for the boundary
SKINFEM_DEFINE_ERROR(OrientationAmbiguous);   // chord/arc multiple crossing
SKINFEM_DEFINE_ERROR(UnsupportedDegree);      // quadrature/basis degree out of range
SKINFEM_DEFINE_ERROR(NoConvergence);          // iterative solver hit its cap
SKINFEM_DEFINE_ERROR(BoundaryElement);        // delta anchor touches the boundary
SKINFEM_DEFINE_ERROR(SingularMoments);        // delta moment system singular
SKINFEM_DEFINE_ERROR(TooLarge);               // dense eigensolve cap exceeded
SKINFEM_DEFINE_ERROR(DegenerateDecomposition);// dyadic J* < 1
SKINFEM_DEFINE_ERROR(DegenerateFit);          // rate fit with no h variation
SKINFEM_DEFINE_ERROR(ReferenceInconsistent);  // two-level Green reference gate failed
SKINFEM_DEFINE_ERROR(PointOutsideFineMesh);   // reference evaluation left the mesh
SKINFEM_DEFINE_ERROR(ConfigError);            // bad experiment configuration
SKINFEM_DEFINE_ERROR(IoError);                // file read/write failure

#undef SKINFEM_DEFINE_ERROR

inline constexpr double kPi = 3.14159265358979323846264338327950288;

}  // namespace skinfem
