#pragma once

// Polygonal approximation Omega_h of a smooth domain and its quasi-uniform,
// shape-regular triangulation. Boundary vertices are equally spaced in
// arclength and lie exactly on the boundary curve; interior points come from
// uniform Delaunay refinement. Also: boundary-skin slivers (the regions
// between each boundary chord and its arc), skin diagnostics, metrics, and
// the text mesh format.

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "skinfem/core.hpp"
#include "skinfem/delaunay.hpp"
#include "skinfem/geometry.hpp"
#include "skinfem/quadrature.hpp"

namespace skinfem {

struct BoundaryEdge {
  int a = -1, b = -1;  // vertex indices, a->b walks CCW around the polygon
  int tri = -1;        // the (unique) adjacent triangle
};

struct Mesh {
  SmoothDomain domain;
  std::vector<Vec2> vertices;
  std::vector<double> boundary_param;  // theta for boundary vertices, NaN inside
  std::vector<std::array<int, 3>> triangles;  // CCW
  std::vector<std::array<int, 3>> neighbors;  // across edge opposite vertex k
  std::vector<BoundaryEdge> boundary_edges;   // ordered around the polygon
  double h_max = 0.0, h_min = 0.0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  bool is_boundary_vertex(int v) const { return !std::isnan(boundary_param[v]); }

  double triangle_area(int t) const {
    const auto& tr = triangles[t];
    return 0.5 * orient2d(vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]);
  }

  double triangle_diameter(int t) const {
    const auto& tr = triangles[t];
    return std::max({dist(vertices[tr[0]], vertices[tr[1]]),
                     dist(vertices[tr[1]], vertices[tr[2]]),
                     dist(vertices[tr[2]], vertices[tr[0]])});
  }

  double min_angle_deg(int t) const {
    const auto& tr = triangles[t];
    double worst = 180.0;
    for (int i = 0; i < 3; ++i) {
      const Vec2 u = vertices[tr[(i + 1) % 3]] - vertices[tr[i]];
      const Vec2 v = vertices[tr[(i + 2) % 3]] - vertices[tr[i]];
      const double ang =
          std::atan2(std::abs(u.cross(v)), u.dot(v)) * 180.0 / kPi;
      worst = std::min(worst, ang);
    }
    return worst;
  }

  double polygon_area() const {
    double s = 0.0;
    for (const auto& be : boundary_edges)
      s += vertices[be.a].cross(vertices[be.b]);
    return 0.5 * s;
  }

  double polygon_perimeter() const {
    double s = 0.0;
    for (const auto& be : boundary_edges) s += dist(vertices[be.a], vertices[be.b]);
    return s;
  }

  // Barycentric coordinates of p in triangle t (may be negative outside).
  std::array<double, 3> barycentric(int t, const Vec2& p) const {
    const auto& tr = triangles[t];
    const Vec2 &a = vertices[tr[0]], &b = vertices[tr[1]], &c = vertices[tr[2]];
    const double den = orient2d(a, b, c);
    return {orient2d(p, b, c) / den, orient2d(a, p, c) / den,
            orient2d(a, b, p) / den};
  }

  // Point location by neighbor walk; returns -1 when p is outside the polygon
  // beyond `slack` (relative to local scale).
  int locate(const Vec2& p, int hint = 0, double slack = 1e-12) const {
    int t = (hint >= 0 && hint < num_triangles()) ? hint : 0;
    const int cap = num_triangles() + 16;
    for (int step = 0; step < cap; ++step) {
      const auto bc = barycentric(t, p);
      int worst = 0;
      for (int k = 1; k < 3; ++k)
        if (bc[k] < bc[worst]) worst = k;
      if (bc[worst] >= -slack) return t;
      const int nb = neighbors[t][worst];
      if (nb < 0) return -1;
      t = nb;
    }
    // Degenerate walk (should not happen): brute force.
    for (int i = 0; i < num_triangles(); ++i) {
      const auto bc = barycentric(i, p);
      if (std::min({bc[0], bc[1], bc[2]}) >= -slack) return i;
    }
    return -1;
  }

  // Nearest triangle by barycentric violation; used for just-outside points.
  int locate_nearest(const Vec2& p, int hint = 0) const {
    const int t = locate(p, hint, 1e-12);
    if (t >= 0) return t;
    int best = 0;
    double best_v = -std::numeric_limits<double>::max();
    // Walk again without giving up, tracking the least violation along hull.
    for (int i = 0; i < num_triangles(); ++i) {
      const auto bc = barycentric(i, p);
      const double v = std::min({bc[0], bc[1], bc[2]});
      if (v > best_v) { best_v = v; best = i; }
    }
    return best;
  }
};

struct MeshMetrics {
  double h_max = 0, h_min = 0, min_angle_deg = 0;
  int triangle_count = 0, vertex_count = 0, boundary_vertex_count = 0;
};

inline MeshMetrics mesh_metrics(const Mesh& m) {
  MeshMetrics mm;
  mm.triangle_count = m.num_triangles();
  mm.vertex_count = m.num_vertices();
  mm.h_max = 0;
  mm.h_min = std::numeric_limits<double>::max();
  mm.min_angle_deg = 180.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const double d = m.triangle_diameter(t);
    mm.h_max = std::max(mm.h_max, d);
    mm.h_min = std::min(mm.h_min, d);
    mm.min_angle_deg = std::min(mm.min_angle_deg, m.min_angle_deg(t));
  }
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.is_boundary_vertex(v)) ++mm.boundary_vertex_count;
  return mm;
}

namespace detail {

inline double domain_diameter(const SmoothDomain& d) {
  double r = 0.0;
  for (int i = 0; i < 512; ++i)
    r = std::max(r, boundary_point(d, d.param_period * i / 512.0).norm());
  return 2.0 * r;  // built-ins contain the origin
}

// Total absolute tangent turning over the open parameter interval.
inline double interval_turning(const SmoothDomain& d, double t0, double t1) {
  constexpr int M = 32;
  double total = 0.0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int j = 0; j < M; ++j) {
    const double t = t0 + (t1 - t0) * (j + 0.5) / M;
    const Vec2 g = boundary_tangent(d, t);
    const double ang = std::atan2(g.y, g.x);
    if (j > 0) {
      double da = ang - prev;
      while (da > kPi) da -= 2.0 * kPi;
      while (da < -kPi) da += 2.0 * kPi;
      total += std::abs(da);
    }
    prev = ang;
  }
  return total;
}

}  // namespace detail

struct MeshOptions {
  double angle_floor_deg = 25.0;
  double qu_cap = 4.0;
  double turning_guard_rad = kPi / 6.0;  // 30 degrees
};

/// Builds the polygonal approximation and its triangulation. Boundary
/// vertices are equally spaced in arclength with spacing <= h_target; the
/// triangulation satisfies min angle >= 25 deg, h_max/h_min <= 4, and
/// h_max in [h_target/2, 2 h_target].
inline Mesh build_mesh(const SmoothDomain& domain, double h_target,
                       const MeshOptions& opt = {}) {
  const double diam = detail::domain_diameter(domain);
  if (!(h_target > 0) || h_target >= 0.5 * diam)
    throw TooCoarse("h_target must lie in (0, diam/2)");

  ArclengthTable table(domain, 2048);
  const double L = table.total_length();
  int nb = static_cast<int>(std::ceil(L / h_target));
  if (nb < 8) throw TooCoarse("fewer than 8 boundary vertices requested");
  if (domain.kind == DomainKind::Square) nb = ((nb + 7) / 8) * 8;

  // Boundary vertices at uniform arclength.
  std::vector<double> thetas(nb);
  std::vector<Vec2> bpts(nb);
  for (int i = 0; i < nb; ++i) {
    thetas[i] = table.theta_at(L * i / nb);
    bpts[i] = boundary_point(domain, thetas[i]);
  }

  // Curvature/mesh compatibility guard.
  for (int i = 0; i < nb; ++i) {
    const double t0 = thetas[i];
    double t1 = thetas[(i + 1) % nb];
    if (t1 <= t0) t1 += domain.param_period;
    if (detail::interval_turning(domain, t0, t1) > opt.turning_guard_rad)
      throw TooCoarse("boundary interval turns more than 30 degrees; reduce h");
  }

  double chord_min = std::numeric_limits<double>::max(), chord_max = 0.0;
  for (int i = 0; i < nb; ++i) {
    const double c = dist(bpts[i], bpts[(i + 1) % nb]);
    chord_min = std::min(chord_min, c);
    chord_max = std::max(chord_max, c);
  }
  // Uniform refinement bound: boundary segments must lie in [r, sqrt(3) r].
  const double r_bound = 0.8 * chord_min;
  if (chord_max > std::sqrt(3.0) * r_bound)
    throw MeshQualityFailure("boundary chord ratio too large for refinement");

  detail::Triangulation T;
  Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const Vec2& p : bpts) {
    lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y);
  }
  T.init_super(lo, hi);
  std::vector<int> bidx(nb);
  int hint = 0;
  for (int i = 0; i < nb; ++i) {
    bidx[i] = T.insert(bpts[i], hint);
    hint = static_cast<int>(T.tris.size()) - 1;
  }
  for (int i = 0; i < nb; ++i) T.recover_edge(bidx[i], bidx[(i + 1) % nb]);
  for (int i = 0; i < nb; ++i)
    T.constraints[detail::Triangulation::edge_key(bidx[i], bidx[(i + 1) % nb])] = 1;
  T.carve_exterior();

  const double area_bound = domain_area(domain);
  const std::size_t budget =
      200 + nb + static_cast<std::size_t>(50.0 * area_bound / (r_bound * r_bound));
  T.refine_uniform(r_bound, budget);

  // Extract the mesh.
  Mesh m;
  m.domain = domain;
  std::vector<int> remap(T.pts.size(), -1);
  for (int t = 0; t < static_cast<int>(T.tris.size()); ++t) {
    if (T.dead[t]) continue;
    for (int k = 0; k < 3; ++k) {
      const int v = T.tris[t].v[k];
      if (remap[v] < 0) {
        remap[v] = m.num_vertices();
        m.vertices.push_back(T.pts[v]);
        m.boundary_param.push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
  }
  for (int i = 0; i < nb; ++i)
    if (remap[bidx[i]] >= 0) m.boundary_param[remap[bidx[i]]] = thetas[i];

  std::vector<int> tri_remap(T.tris.size(), -1);
  for (int t = 0; t < static_cast<int>(T.tris.size()); ++t) {
    if (T.dead[t]) continue;
    tri_remap[t] = m.num_triangles();
    m.triangles.push_back({remap[T.tris[t].v[0]], remap[T.tris[t].v[1]],
                           remap[T.tris[t].v[2]]});
  }
  m.neighbors.assign(m.num_triangles(), {-1, -1, -1});
  for (int t = 0; t < static_cast<int>(T.tris.size()); ++t) {
    if (T.dead[t]) continue;
    for (int k = 0; k < 3; ++k) {
      const int nbt = T.tris[t].adj[k];
      m.neighbors[tri_remap[t]][k] = (nbt >= 0 && !T.dead[nbt]) ? tri_remap[nbt] : -1;
    }
  }
  // Ordered boundary edges with their adjacent triangle.
  std::unordered_map<std::uint64_t, int> edge_tri;
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k)
      if (m.neighbors[t][k] < 0) {
        const int a = m.triangles[t][(k + 1) % 3], b = m.triangles[t][(k + 2) % 3];
        edge_tri[detail::Triangulation::edge_key(a, b)] = t;
      }
  for (int i = 0; i < nb; ++i) {
    const int a = remap[bidx[i]], b = remap[bidx[(i + 1) % nb]];
    auto it = edge_tri.find(detail::Triangulation::edge_key(a, b));
    if (it == edge_tri.end())
      throw MeshQualityFailure("boundary edge lost during refinement");
    m.boundary_edges.push_back({a, b, it->second});
  }

  m.h_max = 0;
  m.h_min = std::numeric_limits<double>::max();
  double min_angle = 180.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    if (m.triangle_area(t) <= 0)
      throw MeshQualityFailure("non-positive triangle orientation");
    const double d = m.triangle_diameter(t);
    m.h_max = std::max(m.h_max, d);
    m.h_min = std::min(m.h_min, d);
    min_angle = std::min(min_angle, m.min_angle_deg(t));
  }
  if (min_angle < opt.angle_floor_deg)
    throw MeshQualityFailure("min angle " + std::to_string(min_angle) +
                             " below floor");
  if (m.h_max / m.h_min > opt.qu_cap)
    throw MeshQualityFailure("quasi-uniformity cap exceeded");
  if (m.h_max < 0.5 * h_target || m.h_max > 2.0 * h_target)
    throw MeshQualityFailure("h_max outside [h_target/2, 2 h_target]");
  return m;
}

/// Nested family with h_target = h0 * 2^-level.
inline std::vector<Mesh> refine_family(const SmoothDomain& domain, double h0,
                                       int levels, const MeshOptions& opt = {}) {
  if (levels < 2) throw ConfigError("refine_family needs levels >= 2");
  std::vector<Mesh> fam;
  fam.reserve(levels);
  for (int l = 0; l < levels; ++l)
    fam.push_back(build_mesh(domain, h0 * std::pow(2.0, -l), opt));
  return fam;
}

// ---------------------------------------------------------------------------
// Boundary-skin slivers: for each boundary edge, the region between the chord
// and the boundary arc, mapped by p(theta, lam) = (1-lam) chord(theta) +
// lam gamma(theta). Signed areas add up to area(Omega) - area(Omega_h).

struct SkinSliver {
  int edge = -1;              // index into mesh.boundary_edges
  double theta0 = 0, theta1 = 0;
  int sign = +1;              // +1: arc outside the chord (in Omega \ Omega_h)
  std::vector<Vec2> points;   // mapped quadrature points
  std::vector<double> weights;  // positive; sum = |sliver area|
  double signed_area = 0;     // + for Omega\Omega_h, - for Omega_h\Omega
};

inline std::vector<SkinSliver> skin_slivers(const Mesh& m, int tensor_points = 5) {
  const SmoothDomain& d = m.domain;
  const QuadRule1D g1d = edge_quadrature(2 * tensor_points - 1);
  const auto& gx = g1d.points;
  const auto& gw = g1d.weights;
  const int n = static_cast<int>(gx.size());

  std::vector<SkinSliver> out;
  out.reserve(m.boundary_edges.size());
  for (int be = 0; be < static_cast<int>(m.boundary_edges.size()); ++be) {
    const BoundaryEdge& e = m.boundary_edges[be];
    const Vec2 A = m.vertices[e.a], B = m.vertices[e.b];
    double t0 = m.boundary_param[e.a], t1 = m.boundary_param[e.b];
    if (t1 <= t0) t1 += d.param_period;
    const double chord_len = dist(A, B);
    const double tol = 1e-12 * chord_len * chord_len;

    // Signed offset of the arc from the chord. Non-convex boundaries have
    // inflections where the arc genuinely crosses its chord, so the interval
    // is split at the crossing parameters and each piece keeps a clean side.
    const auto offset = [&](double th) {
      return orient2d(A, B, boundary_point(d, th));
    };
    std::vector<double> cuts = {t0};
    {
      constexpr int M = 64;
      double prev_th = t0 + (t1 - t0) * 0.5 / M;
      double prev = offset(prev_th);
      for (int j = 1; j < M; ++j) {
        const double th = t0 + (t1 - t0) * (j + 0.5) / M;
        const double val = offset(th);
        if (prev < -tol && val > tol) {
          // bisect the bracket
          double lo = prev_th, hi = th, flo = prev;
          for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi), fm = offset(mid);
            if ((flo < 0) == (fm < 0)) { lo = mid; flo = fm; }
            else hi = mid;
          }
          cuts.push_back(0.5 * (lo + hi));
        } else if (prev > tol && val < -tol) {
          double lo = prev_th, hi = th, flo = prev;
          for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi), fm = offset(mid);
            if ((flo > 0) == (fm > 0)) { lo = mid; flo = fm; }
            else hi = mid;
          }
          cuts.push_back(0.5 * (lo + hi));
        }
        if (std::abs(val) > tol) { prev = val; prev_th = th; }
      }
    }
    cuts.push_back(t1);
    if (cuts.size() > 6)
      throw OrientationAmbiguous("boundary arc crosses its chord " +
                                 std::to_string(cuts.size() - 2) +
                                 " times; refine h");

    for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
      const double a = cuts[piece], b = cuts[piece + 1];
      SkinSliver sl;
      sl.edge = be;
      sl.theta0 = a;
      sl.theta1 = b;
      // Interior of Omega_h lies left of A->B, so an arc left of the chord
      // digs into the polygon: that piece sits in Omega_h \ Omega.
      const double mid_off = offset(0.5 * (a + b));
      sl.sign = (mid_off > 0) ? -1 : +1;
      sl.points.reserve(n * n);
      sl.weights.reserve(n * n);
      double signed_area = 0;
      for (int i = 0; i < n; ++i) {
        const double th = a + (b - a) * gx[i];
        const Vec2 gpt = boundary_point(d, th);
        const Vec2 gp = boundary_tangent(d, th);
        // chord(theta) is the affine reparametrization over the FULL interval
        const Vec2 ch = A + (B - A) * ((th - t0) / (t1 - t0));
        const Vec2 chp = (B - A) / (t1 - t0);
        for (int j = 0; j < n; ++j) {
          const double lam = gx[j];
          const Vec2 p = (1.0 - lam) * ch + lam * gpt;
          const Vec2 p_th = (1.0 - lam) * chp + lam * gp;
          const Vec2 p_lam = gpt - ch;
          const double jac = p_th.cross(p_lam) * (b - a);
          const double w = gw[i] * gw[j] * jac;
          sl.points.push_back(p);
          sl.weights.push_back(std::abs(w));
          signed_area += w;
        }
      }
      sl.signed_area = sl.sign * std::abs(signed_area);
      out.push_back(std::move(sl));
    }
  }
  return out;
}

struct SkinDiagnostics {
  double sup_t_star = 0;          // max |t*| over boundary edge samples
  double skin_area_out = 0;       // |Omega \ Omega_h|
  double skin_area_in = 0;        // |Omega_h \ Omega|
  double normal_deviation_max = 0;  // max |n_h - n(pi(x))|
  double boundary_chord_max = 0;
};

inline SkinDiagnostics skin_diagnostics(const Mesh& m, int samples_per_edge = 64) {
  SkinDiagnostics out;
  const SmoothDomain& d = m.domain;
  for (const BoundaryEdge& e : m.boundary_edges) {
    const Vec2 A = m.vertices[e.a], B = m.vertices[e.b];
    const Vec2 nh = (B - A).rot_cw().normalized();
    out.boundary_chord_max = std::max(out.boundary_chord_max, dist(A, B));
    for (int j = 0; j <= samples_per_edge; ++j) {
      const Vec2 x = A + (B - A) * (static_cast<double>(j) / samples_per_edge);
      const ClosestPoint cp = closest_point(d, x);
      out.sup_t_star = std::max(out.sup_t_star, std::abs(cp.t));
      const Vec2 n = outward_normal(d, cp.theta);
      out.normal_deviation_max =
          std::max(out.normal_deviation_max, (nh - n).norm());
    }
  }
  for (const SkinSliver& s : skin_slivers(m)) {
    if (s.sign > 0)
      out.skin_area_out += std::abs(s.signed_area);
    else
      out.skin_area_in += std::abs(s.signed_area);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text format:
//   line 1: nv nt nbe
//   nv vertex lines: "x y" or "x y theta b"
//   nt triangle lines: "i j k" (0-based, CCW)
//   nbe boundary edge lines: "i j t"

inline void write_mesh(const Mesh& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  char buf[256];
  f << m.num_vertices() << ' ' << m.num_triangles() << ' '
    << m.boundary_edges.size() << '\n';
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.is_boundary_vertex(v)) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g b", m.vertices[v].x,
                    m.vertices[v].y, m.boundary_param[v]);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g %.17g", m.vertices[v].x,
                    m.vertices[v].y);
    }
    f << buf << '\n';
  }
  for (const auto& t : m.triangles)
    f << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : m.boundary_edges)
    f << e.a << ' ' << e.b << ' ' << e.tri << '\n';
  if (!f) throw IoError("write failed: " + path);
}

inline Mesh read_mesh(const std::string& path, const SmoothDomain& domain) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  Mesh m;
  m.domain = domain;
  int nv = 0, nt = 0, nbe = 0;
  f >> nv >> nt >> nbe;
  f.ignore();
  m.vertices.resize(nv);
  m.boundary_param.assign(nv, std::numeric_limits<double>::quiet_NaN());
  std::string line;
  for (int v = 0; v < nv; ++v) {
    std::getline(f, line);
    std::istringstream ss(line);
    double th;
    std::string flag;
    ss >> m.vertices[v].x >> m.vertices[v].y;
    if (ss >> th >> flag && flag == "b") m.boundary_param[v] = th;
  }
  m.triangles.resize(nt);
  for (auto& t : m.triangles) f >> t[0] >> t[1] >> t[2];
  m.boundary_edges.resize(nbe);
  for (auto& e : m.boundary_edges) f >> e.a >> e.b >> e.tri;
  if (!f) throw IoError("parse failed: " + path);
  // Rebuild adjacency and size metrics.
  std::unordered_map<std::uint64_t, std::pair<int, int>> half;
  m.neighbors.assign(nt, {-1, -1, -1});
  for (int t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) {
      const int a = m.triangles[t][(k + 1) % 3], b = m.triangles[t][(k + 2) % 3];
      const auto key = detail::Triangulation::edge_key(a, b);
      auto it = half.find(key);
      if (it == half.end()) {
        half[key] = {t, k};
      } else {
        m.neighbors[t][k] = it->second.first;
        m.neighbors[it->second.first][it->second.second] = t;
      }
    }
  m.h_max = 0;
  m.h_min = std::numeric_limits<double>::max();
  for (int t = 0; t < nt; ++t) {
    const double dmt = m.triangle_diameter(t);
    m.h_max = std::max(m.h_max, dmt);
    m.h_min = std::min(m.h_min, dmt);
  }
  return m;
}

}  // namespace skinfem
