#pragma once

// Lagrange P^k reference elements (k = 1, 2, 3) and the finite element space
// over a Mesh: dof coordinates, element connectivity, and boundary dofs.

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "skinfem/core.hpp"
#include "skinfem/mesh.hpp"

namespace skinfem {

inline int dofs_per_element(int k) {
  if (k < 1 || k > 3) throw UnsupportedDegree("P^k supports k in {1,2,3}");
  return (k + 1) * (k + 2) / 2;
}

/// Reference-element node coordinates, in the local dof order: the three
/// vertices, then (k-1) nodes per edge (01, 12, 20; ordered from the first
/// vertex), then interior nodes.
inline std::vector<Vec2> reference_nodes(int k) {
  switch (k) {
    case 1:
      return {{0, 0}, {1, 0}, {0, 1}};
    case 2:
      return {{0, 0}, {1, 0}, {0, 1}, {0.5, 0}, {0.5, 0.5}, {0, 0.5}};
    case 3:
      return {{0, 0}, {1, 0}, {0, 1},
              {1.0 / 3, 0}, {2.0 / 3, 0},
              {2.0 / 3, 1.0 / 3}, {1.0 / 3, 2.0 / 3},
              {0, 2.0 / 3}, {0, 1.0 / 3},
              {1.0 / 3, 1.0 / 3}};
    default:
      throw UnsupportedDegree("P^k supports k in {1,2,3}");
  }
}

/// Values and reference gradients of all local basis functions at the
/// reference point p.
inline void reference_basis(int k, const Vec2& p, double* values, Vec2* grads) {
  const double l1 = p.x, l2 = p.y, l0 = 1.0 - p.x - p.y;
  // Barycentric gradients in reference coordinates.
  const Vec2 g0{-1, -1}, g1{1, 0}, g2{0, 1};
  switch (k) {
    case 1: {
      values[0] = l0; values[1] = l1; values[2] = l2;
      grads[0] = g0; grads[1] = g1; grads[2] = g2;
      return;
    }
    case 2: {
      const double l[3] = {l0, l1, l2};
      const Vec2 g[3] = {g0, g1, g2};
      for (int i = 0; i < 3; ++i) {
        values[i] = l[i] * (2 * l[i] - 1);
        grads[i] = (4 * l[i] - 1) * g[i];
      }
      const int ea[3] = {0, 1, 2}, eb[3] = {1, 2, 0};
      for (int e = 0; e < 3; ++e) {
        values[3 + e] = 4 * l[ea[e]] * l[eb[e]];
        grads[3 + e] = 4 * (l[ea[e]] * g[eb[e]] + l[eb[e]] * g[ea[e]]);
      }
      return;
    }
    case 3: {
      const double l[3] = {l0, l1, l2};
      const Vec2 g[3] = {g0, g1, g2};
      for (int i = 0; i < 3; ++i) {
        values[i] = 0.5 * l[i] * (3 * l[i] - 1) * (3 * l[i] - 2);
        grads[i] = 0.5 * (27 * l[i] * l[i] - 18 * l[i] + 2) * g[i];
      }
      const int ea[3] = {0, 1, 2}, eb[3] = {1, 2, 0};
      for (int e = 0; e < 3; ++e) {
        const double a = l[ea[e]], b = l[eb[e]];
        const Vec2 ga = g[ea[e]], gb = g[eb[e]];
        // node nearer the first vertex (bary a = 2/3)
        values[3 + 2 * e] = 4.5 * a * b * (3 * a - 1);
        grads[3 + 2 * e] = 4.5 * ((6 * a - 1) * b * ga + a * (3 * a - 1) * gb);
        values[3 + 2 * e + 1] = 4.5 * a * b * (3 * b - 1);
        grads[3 + 2 * e + 1] = 4.5 * ((3 * b - 1) * b * ga + a * (6 * b - 1) * gb);
      }
      values[9] = 27 * l0 * l1 * l2;
      grads[9] = 27 * (l1 * l2 * g0 + l0 * l2 * g1 + l0 * l1 * g2);
      return;
    }
    default:
      throw UnsupportedDegree("P^k supports k in {1,2,3}");
  }
}

/// P^k Lagrange space over a mesh. Global dof order: vertices, then edge
/// dofs (k-1 per mesh edge, ordered from the smaller vertex index), then
/// element-interior dofs.
class FeSpace {
 public:
  FeSpace(Mesh mesh, int degree) : mesh_(std::move(mesh)), k_(degree) {
    if (k_ < 1 || k_ > 3) throw UnsupportedDegree("P^k supports k in {1,2,3}");
    build();
  }

  const Mesh& mesh() const { return mesh_; }
  int degree() const { return k_; }
  int num_dofs() const { return ndof_; }
  int num_edges() const { return num_edges_; }
  const std::vector<Vec2>& dof_coords() const { return dof_coords_; }
  const std::vector<int>& element_dofs(int t) const { return elem_dofs_[t]; }
  const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }
  /// Dofs on boundary edge `be`, ordered along a -> b (including endpoints).
  const std::vector<int>& boundary_edge_dofs(int be) const {
    return boundary_edge_dofs_[be];
  }

  // Affine map pieces for element t.
  Vec2 map_to_physical(int t, const Vec2& ref) const {
    const auto& tr = mesh_.triangles[t];
    const Vec2 &a = mesh_.vertices[tr[0]], &b = mesh_.vertices[tr[1]],
               &c = mesh_.vertices[tr[2]];
    return a + ref.x * (b - a) + ref.y * (c - a);
  }

  // grad_phys = J^{-T} grad_ref; returns det(J) = 2 * area.
  double physical_gradients(int t, const Vec2* ref_grads, int n,
                            Vec2* phys_grads) const {
    const auto& tr = mesh_.triangles[t];
    const Vec2 e1 = mesh_.vertices[tr[1]] - mesh_.vertices[tr[0]];
    const Vec2 e2 = mesh_.vertices[tr[2]] - mesh_.vertices[tr[0]];
    const double det = e1.cross(e2);
    // J = [e1 e2]; J^{-T} = (1/det) [[e2.y, -e1.y], [-e2.x, e1.x]]^T applied
    // to (gx, gy): gp = (gx * e2.y - gy * e1.y, -gx * e2.x + gy * e1.x)/det
    for (int i = 0; i < n; ++i) {
      const Vec2 g = ref_grads[i];
      phys_grads[i] = {(g.x * e2.y - g.y * e1.y) / det,
                       (-g.x * e2.x + g.y * e1.x) / det};
    }
    return det;
  }

  /// Evaluate a coefficient vector at reference point `ref` of element t.
  template <class Coefs>
  double eval(const Coefs& c, int t, const Vec2& ref) const {
    const int nd = dofs_per_element(k_);
    double vals[10];
    Vec2 grads[10];
    reference_basis(k_, ref, vals, grads);
    double s = 0;
    const auto& dofs = elem_dofs_[t];
    for (int i = 0; i < nd; ++i) s += c[dofs[i]] * vals[i];
    return s;
  }

  template <class Coefs>
  Vec2 eval_grad(const Coefs& c, int t, const Vec2& ref) const {
    const int nd = dofs_per_element(k_);
    double vals[10];
    Vec2 grads[10], pgrads[10];
    reference_basis(k_, ref, vals, grads);
    physical_gradients(t, grads, nd, pgrads);
    Vec2 s{0, 0};
    const auto& dofs = elem_dofs_[t];
    for (int i = 0; i < nd; ++i) s += c[dofs[i]] * pgrads[i];
    return s;
  }

  // Reference coordinates of physical point p inside element t.
  Vec2 to_reference(int t, const Vec2& p) const {
    const auto bc = mesh_.barycentric(t, p);
    return {bc[1], bc[2]};
  }

 private:
  void build() {
    const int V = mesh_.num_vertices();
    const int nt = mesh_.num_triangles();
    const int per_edge = k_ - 1;
    const int interior = (k_ - 1) * (k_ - 2) / 2;

    std::unordered_map<std::uint64_t, int> edge_ids;
    edge_ids.reserve(nt * 2);
    auto edge_id = [&](int a, int b) {
      const auto key = detail::Triangulation::edge_key(a, b);
      auto it = edge_ids.find(key);
      if (it != edge_ids.end()) return it->second;
      const int id = static_cast<int>(edge_ids.size());
      edge_ids[key] = id;
      return id;
    };
    // First pass: assign edge ids in deterministic element order.
    for (int t = 0; t < nt; ++t) {
      const auto& tr = mesh_.triangles[t];
      edge_id(tr[0], tr[1]);
      edge_id(tr[1], tr[2]);
      edge_id(tr[2], tr[0]);
    }
    num_edges_ = static_cast<int>(edge_ids.size());
    ndof_ = V + per_edge * num_edges_ + interior * nt;
    dof_coords_.assign(ndof_, {});
    for (int v = 0; v < V; ++v) dof_coords_[v] = mesh_.vertices[v];

    const auto ref_nodes = reference_nodes(k_);
    elem_dofs_.assign(nt, {});
    for (int t = 0; t < nt; ++t) {
      const auto& tr = mesh_.triangles[t];
      auto& dofs = elem_dofs_[t];
      dofs.resize(dofs_per_element(k_));
      dofs[0] = tr[0];
      dofs[1] = tr[1];
      dofs[2] = tr[2];
      const int ea[3] = {0, 1, 2}, eb[3] = {1, 2, 0};
      for (int e = 0; e < 3; ++e) {
        const int a = tr[ea[e]], b = tr[eb[e]];
        const int eid = edge_id(a, b);
        for (int j = 0; j < per_edge; ++j) {
          // Global edge dofs run from the smaller vertex index.
          const int slot = (a < b) ? j : (per_edge - 1 - j);
          dofs[3 + per_edge * e + j] = V + per_edge * eid + slot;
        }
      }
      for (int j = 0; j < interior; ++j)
        dofs[3 + 3 * per_edge + j] = V + per_edge * num_edges_ + interior * t + j;
      for (int i = 0; i < dofs_per_element(k_); ++i)
        dof_coords_[dofs[i]] = map_to_physical(t, ref_nodes[i]);
    }

    // Boundary dofs, per boundary edge and unique.
    boundary_edge_dofs_.assign(mesh_.boundary_edges.size(), {});
    std::vector<char> seen(ndof_, 0);
    for (std::size_t be = 0; be < mesh_.boundary_edges.size(); ++be) {
      const BoundaryEdge& e = mesh_.boundary_edges[be];
      auto& list = boundary_edge_dofs_[be];
      list.push_back(e.a);
      const int eid = edge_id(e.a, e.b);
      for (int j = 0; j < per_edge; ++j) {
        const int slot = (e.a < e.b) ? j : (per_edge - 1 - j);
        list.push_back(V + per_edge * eid + slot);
      }
      list.push_back(e.b);
      for (int dof : list)
        if (!seen[dof]) {
          seen[dof] = 1;
          boundary_dofs_.push_back(dof);
        }
    }
  }

  Mesh mesh_;
  int k_;
  int ndof_ = 0;
  int num_edges_ = 0;
  std::vector<Vec2> dof_coords_;
  std::vector<std::vector<int>> elem_dofs_;
  std::vector<int> boundary_dofs_;
  std::vector<std::vector<int>> boundary_edge_dofs_;
};

}  // namespace skinfem
