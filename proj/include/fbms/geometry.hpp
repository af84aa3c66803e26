#pragma once

// Discrete geometry on triangle meshes: P1 scalar operators (cotangent
// stiffness, mass, boundary mass), per-vertex shape operators (analytic or
// estimated), piecewise-linear gradients, boundary frames, and the Steklov
// residual of the coordinate functions.

#include "fbms/mesh.hpp"
#include "fbms/surfaces.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <functional>
#include <queue>

namespace fbms {

using SpMat = Eigen::SparseMatrix<double>;

// Barycentric gradients: grad of the hat function at corner a is
// n x (p_c - p_b) / (2 |T|) for the face normal n.
inline std::array<Vec3, 3> corner_gradients(const SurfaceMesh& mesh, int t, double* area_out = nullptr) {
  const auto& tri = mesh.triangles[t];
  const Vec3 &p0 = mesh.vertices[tri[0]], &p1 = mesh.vertices[tri[1]], &p2 = mesh.vertices[tri[2]];
  Vec3 n2 = (p1 - p0).cross(p2 - p0);
  double area2 = n2.norm();
  if (area2 <= 2e-14)
    throw std::runtime_error("degenerate triangle " + std::to_string(t) + " in operator assembly");
  Vec3 n = n2 / area2;
  if (area_out) *area_out = 0.5 * area2;
  return {n.cross(p2 - p1) / area2, n.cross(p0 - p2) / area2, n.cross(p1 - p0) / area2};
}

inline Vec3 face_normal(const SurfaceMesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  return (mesh.vertices[tri[1]] - mesh.vertices[tri[0]])
      .cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]])
      .normalized();
}

enum class MassType { Lumped, Consistent };

struct ScalarOperators {
  SpMat stiffness;      // cotangent Laplacian, PSD
  SpMat mass;           // lumped (diagonal) or consistent
  SpMat boundary_mass;  // diagonal; half the length of adjacent boundary edges
  Eigen::VectorXd lumped_mass;
  Eigen::VectorXd boundary_weight;
  double area = 0;
};

inline ScalarOperators assemble_scalar_operators(const SurfaceMesh& mesh, const EdgeTable& et,
                                                 MassType mass_type = MassType::Lumped) {
  const int nv = mesh.vertex_count();
  ScalarOperators ops;
  std::vector<Eigen::Triplet<double>> kt, mt;
  ops.lumped_mass = Eigen::VectorXd::Zero(nv);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = 0;
    auto g = corner_gradients(mesh, t, &area);
    ops.area += area;
    const auto& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a) {
      ops.lumped_mass[tri[a]] += area / 3.0;
      for (int b = 0; b < 3; ++b) {
        kt.emplace_back(tri[a], tri[b], area * g[a].dot(g[b]));
        if (mass_type == MassType::Consistent)
          mt.emplace_back(tri[a], tri[b], area * (a == b ? 2.0 : 1.0) / 12.0);
      }
    }
  }
  ops.stiffness.resize(nv, nv);
  ops.stiffness.setFromTriplets(kt.begin(), kt.end());
  ops.mass.resize(nv, nv);
  if (mass_type == MassType::Consistent) {
    ops.mass.setFromTriplets(mt.begin(), mt.end());
  } else {
    for (int v = 0; v < nv; ++v) mt.emplace_back(v, v, ops.lumped_mass[v]);
    ops.mass.setFromTriplets(mt.begin(), mt.end());
  }

  ops.boundary_weight = Eigen::VectorXd::Zero(nv);
  for (int e = 0; e < et.edge_count(); ++e) {
    if (!et.edge_on_boundary[e]) continue;
    double half = 0.5 * (mesh.vertices[et.edges[e][1]] - mesh.vertices[et.edges[e][0]]).norm();
    ops.boundary_weight[et.edges[e][0]] += half;
    ops.boundary_weight[et.edges[e][1]] += half;
  }
  std::vector<Eigen::Triplet<double>> bt;
  for (int v = 0; v < nv; ++v)
    if (ops.boundary_weight[v] > 0) bt.emplace_back(v, v, ops.boundary_weight[v]);
  ops.boundary_mass.resize(nv, nv);
  ops.boundary_mass.setFromTriplets(bt.begin(), bt.end());
  return ops;
}

// ---------------------------------------------------------------------------
// Shape fields
// ---------------------------------------------------------------------------

struct ShapeField {
  std::vector<Vec3> normal;
  std::vector<Vec3> frame1, frame2;          // orthonormal tangent basis per vertex
  std::vector<Eigen::Matrix2d> shape;        // shape operator in (frame1, frame2)
  Eigen::VectorXd a2;                        // |A|^2 = |S|^2
  bool analytic = false;

  Eigen::Matrix3d shape_ambient(int v) const {
    const Vec3 &t1 = frame1[v], &t2 = frame2[v];
    const Eigen::Matrix2d& S = shape[v];
    return S(0, 0) * t1 * t1.transpose() + S(0, 1) * (t1 * t2.transpose() + t2 * t1.transpose()) +
           S(1, 1) * t2 * t2.transpose();
  }
  // S applied to the tangential part of an ambient vector.
  Vec3 apply(int v, const Vec3& x) const { return shape_ambient(v) * x; }
};

inline std::vector<Vec3> estimate_vertex_normals(const SurfaceMesh& mesh) {
  std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    Vec3 an = (mesh.vertices[tri[1]] - mesh.vertices[tri[0]])
                  .cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);  // area-weighted
    for (int i = 0; i < 3; ++i) normals[tri[i]] += an;
  }
  for (auto& n : normals) {
    double len = n.norm();
    if (len < 1e-300) throw std::runtime_error("estimate_vertex_normals: zero normal");
    n /= len;
  }
  return normals;
}

inline ShapeField shape_field_analytic(const SurfaceMesh& mesh, const AnalyticSurface& surf) {
  ShapeField f;
  f.analytic = true;
  const int nv = mesh.vertex_count();
  f.normal.resize(nv);
  f.frame1.resize(nv);
  f.frame2.resize(nv);
  f.shape.resize(nv);
  f.a2.resize(nv);
  for (int v = 0; v < nv; ++v) {
    const Vec3& p = mesh.vertices[v];
    f.normal[v] = surf.unit_normal(p);
    auto [e1, e2] = surf.tangent_frame(p);
    f.frame1[v] = e1;
    f.frame2[v] = e2;
    f.shape[v] = surf.shape(p);
    f.a2[v] = surf.norm_A_squared(p);
  }
  return f;
}

// Shape operator from an osculating quadric: fit a local height function
// h(x, y) = c0 + ax + by + (h11 x^2 + 2 h12 xy + h22 y^2)/2 over the two-ring
// in a tangent frame seeded by the area-weighted normal, refit once in the
// improved frame, and read S = Hess h there (our convention S = -(dN)^T, so
// the unit sphere with outward normal has S = -I). Throws when the two-ring
// is rank-deficient.
inline ShapeField shape_field_estimated(const SurfaceMesh& mesh, const EdgeTable& et) {
  ShapeField f;
  f.analytic = false;
  const int nv = mesh.vertex_count();
  f.normal = estimate_vertex_normals(mesh);
  f.frame1.resize(nv);
  f.frame2.resize(nv);
  f.shape.resize(nv);
  f.a2.resize(nv);

  std::vector<std::vector<int>> adj(nv);
  for (const auto& e : et.edges) {
    adj[e[0]].push_back(e[1]);
    adj[e[1]].push_back(e[0]);
  }

  std::vector<int> stamp(nv, -1);
  std::vector<int> ring;
  for (int v = 0; v < nv; ++v) {
    ring.clear();
    stamp[v] = v;
    for (int w : adj[v])
      if (stamp[w] != v) {
        stamp[w] = v;
        ring.push_back(w);
      }
    const size_t one_ring = ring.size();
    for (size_t k = 0; k < one_ring; ++k)
      for (int w : adj[ring[k]])
        if (stamp[w] != v) {
          stamp[w] = v;
          ring.push_back(w);
        }
    if (ring.size() < 5)
      throw std::runtime_error("shape_field_estimated: vertex " + std::to_string(v) +
                               " has too few two-ring neighbours");

    Vec3 n = f.normal[v];
    double scale = 0;
    for (int w : ring) scale += (mesh.vertices[w] - mesh.vertices[v]).norm();
    scale /= static_cast<double>(ring.size());

    Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
    Vec3 t1, t2;
    for (int pass = 0; pass < 2; ++pass) {
      Vec3 seed = std::abs(n.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
      t1 = (seed - seed.dot(n) * n).normalized();
      t2 = n.cross(t1);
      Eigen::MatrixXd A(ring.size(), 6);
      Eigen::VectorXd rhs(ring.size());
      for (size_t k = 0; k < ring.size(); ++k) {
        Vec3 d = (mesh.vertices[ring[k]] - mesh.vertices[v]) / scale;
        double x = d.dot(t1), y = d.dot(t2);
        A.row(k) << 1.0, x, y, 0.5 * x * x, x * y, 0.5 * y * y;
        rhs[k] = d.dot(n);
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
      if (svd.singularValues()(5) < 1e-8 * svd.singularValues()(0))
        throw std::runtime_error("shape_field_estimated: rank-deficient two-ring at vertex " +
                                 std::to_string(v));
      Eigen::VectorXd q = svd.solve(rhs);
      // Graph normal (-h_x, -h_y, 1); gradients are scale-free, the Hessian
      // picks up 1/scale from the normalization.
      Vec3 n_new = (n - q[1] * t1 - q[2] * t2).normalized();
      hess << q[3], q[4], q[4], q[5];
      hess /= scale;
      double g2 = q[1] * q[1] + q[2] * q[2];
      hess /= std::sqrt((1.0 + g2) * (1.0 + g2) * (1.0 + g2));  // Weingarten correction
      n = n_new;
    }
    f.normal[v] = n;
    f.frame1[v] = t1;
    f.frame2[v] = t2;
    f.shape[v] = hess;
    f.a2[v] = hess.squaredNorm();
  }
  return f;
}

inline ShapeField shape_field(const SurfaceBundle& bundle) {
  if (bundle.analytic) return shape_field_analytic(bundle.mesh, *bundle.analytic);
  return shape_field_estimated(bundle.mesh, bundle.edges);
}

// Independent |A|^2 estimate from edge dihedral angles (a curvature-tensor
// average over the vertex star). Meaningful at interior vertices; used as a
// cross-check of the least-squares field, not in operator assembly.
inline Eigen::VectorXd a2_from_dihedrals(const SurfaceMesh& mesh, const EdgeTable& et) {
  const int nv = mesh.vertex_count();
  std::vector<Eigen::Matrix3d> tensor(nv, Eigen::Matrix3d::Zero());
  Eigen::VectorXd area(nv);
  area.setZero();
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double a = triangle_area(mesh, t);
    for (int i = 0; i < 3; ++i) area[mesh.triangles[t][i]] += a / 3.0;
  }
  for (int e = 0; e < et.edge_count(); ++e) {
    if (et.edge_on_boundary[e]) continue;
    int ta = et.edge_tris[e][0], tb = et.edge_tris[e][1];
    // Fix the sign convention: ta is the triangle traversing a->b canonically.
    {
      bool ta_positive = false;
      for (int i = 0; i < 3; ++i)
        if (et.tri_edges[ta][i] == e && et.tri_signs[ta][i] == 1) ta_positive = true;
      if (!ta_positive) std::swap(ta, tb);
    }
    Vec3 na = face_normal(mesh, ta), nb = face_normal(mesh, tb);
    Vec3 ev = mesh.vertices[et.edges[e][1]] - mesh.vertices[et.edges[e][0]];
    double len = ev.norm();
    Vec3 ehat = ev / len;
    double beta = std::atan2(na.cross(nb).dot(ehat), na.dot(nb));
    // Half the edge length lands in each endpoint's barycentric star.
    Eigen::Matrix3d contrib = (beta * 0.5 * len) * (ehat * ehat.transpose());
    tensor[et.edges[e][0]] += contrib;
    tensor[et.edges[e][1]] += contrib;
  }
  auto normals = estimate_vertex_normals(mesh);
  Eigen::VectorXd a2(nv);
  for (int v = 0; v < nv; ++v) {
    Eigen::Matrix3d P = Eigen::Matrix3d::Identity() - normals[v] * normals[v].transpose();
    Eigen::Matrix3d T = P * (tensor[v] / area[v]) * P;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(T);
    // Two curvature eigenvalues plus a near-zero normal one; drop the one
    // with the smallest magnitude... the normal direction carries ~0.
    Eigen::Vector3d ev = es.eigenvalues();
    int drop = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(ev[i]) < std::abs(ev[drop])) drop = i;
    double s = 0;
    for (int i = 0; i < 3; ++i)
      if (i != drop) s += ev[i] * ev[i];
    a2[v] = s;
  }
  return a2;
}

// ---------------------------------------------------------------------------
// Gradients
// ---------------------------------------------------------------------------

inline std::vector<Vec3> face_gradients(const SurfaceMesh& mesh, const Eigen::VectorXd& u) {
  std::vector<Vec3> g(mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    auto cg = corner_gradients(mesh, t);
    const auto& tri = mesh.triangles[t];
    g[t] = u[tri[0]] * cg[0] + u[tri[1]] * cg[1] + u[tri[2]] * cg[2];
  }
  return g;
}

inline std::vector<Vec3> vertex_gradients(const SurfaceMesh& mesh, const Eigen::VectorXd& u) {
  std::vector<Vec3> out(mesh.vertices.size(), Vec3::Zero());
  Eigen::VectorXd wsum = Eigen::VectorXd::Zero(mesh.vertex_count());
  auto fg = face_gradients(mesh, u);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double a = triangle_area(mesh, t);
    for (int i = 0; i < 3; ++i) {
      out[mesh.triangles[t][i]] += a * fg[t];
      wsum[mesh.triangles[t][i]] += a;
    }
  }
  for (int v = 0; v < mesh.vertex_count(); ++v) out[v] /= wsum[v];
  return out;
}

// Per-face Jacobian of a vertex-based ambient vector field, then the
// area-weighted vertex average. Row r is the PL gradient of component r.
inline std::vector<Eigen::Matrix3d> vertex_jacobians(const SurfaceMesh& mesh,
                                                     const std::vector<Vec3>& field) {
  std::vector<Eigen::Matrix3d> out(mesh.vertices.size(), Eigen::Matrix3d::Zero());
  Eigen::VectorXd wsum = Eigen::VectorXd::Zero(mesh.vertex_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = 0;
    auto cg = corner_gradients(mesh, t, &area);
    const auto& tri = mesh.triangles[t];
    Eigen::Matrix3d Jf = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) Jf += field[tri[i]] * cg[i].transpose();
    for (int i = 0; i < 3; ++i) {
      out[tri[i]] += area * Jf;
      wsum[tri[i]] += area;
    }
  }
  for (int v = 0; v < mesh.vertex_count(); ++v) out[v] /= wsum[v];
  return out;
}

// ---------------------------------------------------------------------------
// Boundary frames and the Steklov residual
// ---------------------------------------------------------------------------

// The scalar second fundamental form of the container boundary with respect
// to its outward normal. For the unit ball this is -1 for every unit tangent
// direction, which is what makes it a convex body in our sign convention.
inline double ball_support(const Vec3& /*p*/, const Vec3& /*N*/) { return -1.0; }

struct BoundaryFrame {
  std::vector<int> loop_of_vertex;   // -1 for interior vertices
  std::vector<Vec3> conormal;        // outward unit conormal at boundary vertices
  std::vector<Vec3> tangent;         // unit tangent along the oriented loop
};

inline BoundaryFrame boundary_frames(const SurfaceMesh& mesh, const EdgeTable& et,
                                     const std::vector<std::vector<int>>& loops,
                                     const std::vector<Vec3>& vertex_normals) {
  BoundaryFrame bf;
  const int nv = mesh.vertex_count();
  bf.loop_of_vertex.assign(nv, -1);
  bf.conormal.assign(nv, Vec3::Zero());
  bf.tangent.assign(nv, Vec3::Zero());
  for (size_t l = 0; l < loops.size(); ++l) {
    const auto& L = loops[l];
    const int n = static_cast<int>(L.size());
    for (int i = 0; i < n; ++i) {
      int v = L[i];
      bf.loop_of_vertex[v] = static_cast<int>(l);
      Vec3 t = (mesh.vertices[L[(i + 1) % n]] - mesh.vertices[L[(i - 1 + n) % n]]).normalized();
      bf.tangent[v] = t;
      // Surface on the left of the loop => t x N points outward.
      bf.conormal[v] = t.cross(vertex_normals[v]).normalized();
    }
  }
  return bf;
}

// max over boundary vertices and coordinates of |d x_c / d eta - x_c|; the
// coordinate functions of a free boundary minimal surface in the unit ball
// are Steklov eigenfunctions with eigenvalue 1.
inline double steklov_residual(const SurfaceMesh& mesh, const EdgeTable& et) {
  auto normals = estimate_vertex_normals(mesh);
  auto loops = boundary_loops(mesh, et);
  if (loops.empty()) throw std::runtime_error("steklov_residual: mesh has no boundary");
  BoundaryFrame bf = boundary_frames(mesh, et, loops, normals);
  double res = 0;
  for (int c = 0; c < 3; ++c) {
    Eigen::VectorXd xc(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) xc[v] = mesh.vertices[v][c];
    auto grad = vertex_gradients(mesh, xc);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      if (bf.loop_of_vertex[v] < 0) continue;
      res = std::max(res, std::abs(grad[v].dot(bf.conormal[v]) - xc[v]));
    }
  }
  return res;
}

// Graph distance (in edges) from the boundary; used to carve out interior
// regions where pointwise identities are checked without boundary effects.
inline std::vector<int> distance_to_boundary(const SurfaceMesh& mesh, const EdgeTable& et) {
  std::vector<int> dist(mesh.vertices.size(), -1);
  std::queue<int> q;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (et.vertex_on_boundary[v]) {
      dist[v] = 0;
      q.push(v);
    }
  std::vector<std::vector<int>> adj(mesh.vertices.size());
  for (const auto& e : et.edges) {
    adj[e[0]].push_back(e[1]);
    adj[e[1]].push_back(e[0]);
  }
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : adj[v])
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        q.push(w);
      }
  }
  for (auto& d : dist)
    if (d < 0) d = std::numeric_limits<int>::max();  // closed mesh: no boundary anywhere
  return dist;
}

// Geodesic (edge-path) distance from the boundary. Unlike the hop count this
// is resolution-independent, so a fixed margin selects the same continuum
// subdomain at every refinement level.
inline std::vector<double> geodesic_distance_to_boundary(const SurfaceMesh& mesh,
                                                         const EdgeTable& et) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(mesh.vertices.size(), inf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (et.vertex_on_boundary[v]) {
      dist[v] = 0;
      heap.emplace(0.0, v);
    }
  std::vector<std::vector<std::pair<int, double>>> adj(mesh.vertices.size());
  for (const auto& e : et.edges) {
    double len = (mesh.vertices[e[0]] - mesh.vertices[e[1]]).norm();
    adj[e[0]].emplace_back(e[1], len);
    adj[e[1]].emplace_back(e[0], len);
  }
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (auto [w, len] : adj[v])
      if (d + len < dist[w]) {
        dist[w] = d + len;
        heap.emplace(dist[w], w);
      }
  }
  return dist;
}

}  // namespace fbms
