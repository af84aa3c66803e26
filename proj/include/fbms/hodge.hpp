#pragma once

// Hodge Laplacian on 1-forms via lowest-order Whitney (edge) elements.
// The operator is the Schur-reduced mixed form
//     A = M1 D0 M0^{-1} D0^T M1 + D1^T M2 D1,      B = M1,
// which carries absolute boundary conditions naturally; relative conditions
// are essential (boundary-edge DOFs and boundary-vertex potentials removed).
// Two structural identities hold to machine precision and anchor the tests:
//     D1 D0 = 0   and   D0^T M1 D0 = cotangent stiffness.

#include "fbms/eigensolve.hpp"
#include "fbms/geometry.hpp"

#include <Eigen/SparseCholesky>

namespace fbms {

struct Incidence {
  SpMat d0;  // edges x vertices, rows (-1, +1) on canonical (a < b) endpoints
  SpMat d1;  // faces x edges, traversal signs against canonical direction
};

inline Incidence build_incidence(const SurfaceMesh& mesh, const EdgeTable& et) {
  Incidence inc;
  std::vector<Eigen::Triplet<double>> t0, t1;
  for (int e = 0; e < et.edge_count(); ++e) {
    t0.emplace_back(e, et.edges[e][0], -1.0);
    t0.emplace_back(e, et.edges[e][1], 1.0);
  }
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for (int i = 0; i < 3; ++i)
      t1.emplace_back(t, et.tri_edges[t][i], static_cast<double>(et.tri_signs[t][i]));
  inc.d0.resize(et.edge_count(), mesh.vertex_count());
  inc.d0.setFromTriplets(t0.begin(), t0.end());
  inc.d1.resize(mesh.triangle_count(), et.edge_count());
  inc.d1.setFromTriplets(t1.begin(), t1.end());
  return inc;
}

// Consistent mass of Whitney 1-forms W_ab = lambda_a grad lambda_b - lambda_b grad lambda_a,
// assembled per triangle from int lambda_x lambda_y = |T| (1 + delta_xy) / 12.
inline SpMat whitney_edge_mass(const SurfaceMesh& mesh, const EdgeTable& et) {
  std::vector<Eigen::Triplet<double>> ts;
  ts.reserve(mesh.triangles.size() * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = 0;
    auto g = corner_gradients(mesh, t, &area);
    for (int i = 0; i < 3; ++i) {
      int ai = i, bi = (i + 1) % 3;  // local directed edge i: tri[ai] -> tri[bi]
      for (int j = 0; j < 3; ++j) {
        int aj = j, bj = (j + 1) % 3;
        auto C = [&](int x, int y) { return area * (x == y ? 2.0 : 1.0) / 12.0; };
        double val = C(ai, aj) * g[bi].dot(g[bj]) - C(ai, bj) * g[bi].dot(g[aj]) -
                     C(bi, aj) * g[ai].dot(g[bj]) + C(bi, bj) * g[ai].dot(g[aj]);
        ts.emplace_back(et.tri_edges[t][i], et.tri_edges[t][j],
                        et.tri_signs[t][i] * et.tri_signs[t][j] * val);
      }
    }
  }
  SpMat m1(et.edge_count(), et.edge_count());
  m1.setFromTriplets(ts.begin(), ts.end());
  return m1;
}

enum class OneFormBC { Absolute, Relative };

inline std::string to_string(OneFormBC bc) {
  return bc == OneFormBC::Absolute ? "absolute" : "relative";
}

struct HodgeProblem {
  OneFormBC bc = OneFormBC::Absolute;
  SpMat A, B;                       // reduced pencil over retained edges
  SpMat edge_selector;              // retained edges x all edges
  Incidence incidence;              // full-mesh operators
  SpMat m1;                         // full Whitney mass
  Eigen::VectorXd m0_lumped;        // vertex masses
  Eigen::VectorXd m2;               // face masses of Whitney 2-forms, 1/|T|
  std::vector<int> retained_edges;  // ascending edge ids
  int beta_expected = 0;            // 2g + k - 1, or 2g when the mesh is closed

  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const {
    return edge_selector.transpose() * reduced;
  }
  Eigen::VectorXd restrict_cochain(const Eigen::VectorXd& full) const {
    return edge_selector * full;
  }
};

inline HodgeProblem assemble_one_form_laplacian(const SurfaceBundle& bundle, OneFormBC bc) {
  const SurfaceMesh& mesh = bundle.mesh;
  const EdgeTable& et = bundle.edges;
  HodgeProblem p;
  p.bc = bc;
  p.incidence = build_incidence(mesh, et);
  p.m1 = whitney_edge_mass(mesh, et);
  ScalarOperators ops = assemble_scalar_operators(mesh, et);
  p.m0_lumped = ops.lumped_mass;
  p.m2.resize(mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) p.m2[t] = 1.0 / triangle_area(mesh, t);
  const int k = bundle.topology.boundary_components;
  p.beta_expected = 2 * bundle.topology.genus + (k > 0 ? k - 1 : 0);

  std::vector<int> vertices_kept;
  for (int e = 0; e < et.edge_count(); ++e)
    if (bc == OneFormBC::Absolute || !et.edge_on_boundary[e]) p.retained_edges.push_back(e);
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (bc == OneFormBC::Absolute || !et.vertex_on_boundary[v]) vertices_kept.push_back(v);

  auto selector = [](const std::vector<int>& keep, int full) {
    SpMat P(static_cast<int>(keep.size()), full);
    std::vector<Eigen::Triplet<double>> ts;
    for (size_t i = 0; i < keep.size(); ++i) ts.emplace_back(static_cast<int>(i), keep[i], 1.0);
    P.setFromTriplets(ts.begin(), ts.end());
    return P;
  };
  p.edge_selector = selector(p.retained_edges, et.edge_count());
  SpMat Pv = selector(vertices_kept, mesh.vertex_count());

  SpMat m0_inv(static_cast<int>(vertices_kept.size()), static_cast<int>(vertices_kept.size()));
  SpMat m2d(mesh.triangle_count(), mesh.triangle_count());
  {
    std::vector<Eigen::Triplet<double>> t0, t2;
    for (size_t i = 0; i < vertices_kept.size(); ++i)
      t0.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0 / p.m0_lumped[vertices_kept[i]]);
    for (int t = 0; t < mesh.triangle_count(); ++t) t2.emplace_back(t, t, p.m2[t]);
    m0_inv.setFromTriplets(t0.begin(), t0.end());
    m2d.setFromTriplets(t2.begin(), t2.end());
  }

  SpMat d0r = SpMat(Pv * p.incidence.d0.transpose() * p.m1 * p.edge_selector.transpose());  // vertices x edges
  SpMat d1r = SpMat(p.incidence.d1 * p.edge_selector.transpose());
  p.A = SpMat(SpMat(d0r.transpose() * m0_inv * d0r) + SpMat(d1r.transpose() * m2d * d1r));
  p.B = SpMat(p.edge_selector * p.m1 * p.edge_selector.transpose());
  return p;
}

inline SpectralResult eigen_one_form(const HodgeProblem& p, int count, EigenOptions opts = {}) {
  return smallest_eigenpairs(p.A, p.B, count, opts);
}

// ---------------------------------------------------------------------------
// Kernel dimension (first Betti number of the complex under the given BC)
// ---------------------------------------------------------------------------

struct BettiResult {
  int dim = 0;
  bool ambiguous = false;
  double gap_ratio = std::numeric_limits<double>::infinity();
  Eigen::VectorXd values;
};

inline BettiResult betti_one(const HodgeProblem& p, EigenOptions opts = {}) {
  const int n = static_cast<int>(p.A.rows());
  int probe = std::min(n, std::max(12, p.beta_expected + 5));
  opts.want_vectors = false;
  SpectralResult r = smallest_eigenpairs(p.A, p.B, probe, opts);
  BettiResult b;
  b.values = r.values;
  const int found = static_cast<int>(r.values.size());
  double lmax = r.values.cwiseAbs().maxCoeff();
  double floor_tol = 1e-14 * lmax;
  while (b.dim < found && r.values[b.dim] < 1e-6 * lmax) ++b.dim;
  if (b.dim > 0)
    b.gap_ratio = r.values[std::min(b.dim, found - 1)] /
                  std::max(r.values[b.dim - 1], floor_tol);
  b.ambiguous = (b.dim == found) || (b.dim > 0 && b.gap_ratio < 10.0);
  return b;
}

// ---------------------------------------------------------------------------
// Scalar reduction: the absolute 1-form spectrum decomposes into the nonzero
// Neumann scalar spectrum (exact eigenforms df), the Dirichlet scalar spectrum
// (coexact eigenforms *dg), and a zero eigenvalue of multiplicity 2g + k - 1.
// The Neumann branch shares the lumped vertex mass with the mixed operator, so
// those eigenvalues transfer to the edge-element problem exactly; the rest
// agree only in the limit and provide the independent cross-check.
// ---------------------------------------------------------------------------

struct ScalarReduction {
  Eigen::VectorXd combined;   // ascending, including the topological zeros
  Eigen::VectorXd neumann;    // nonzero Neumann values
  Eigen::VectorXd dirichlet;  // Dirichlet values
  int zero_multiplicity = 0;
};

inline ScalarReduction spectrum_via_scalar_reduction(const SurfaceBundle& bundle, int count,
                                                     EigenOptions opts = {}) {
  ScalarOperators ops =
      assemble_scalar_operators(bundle.mesh, bundle.edges, MassType::Consistent);
  const int nv = bundle.mesh.vertex_count();
  ScalarReduction out;
  out.zero_multiplicity = 2 * bundle.topology.genus +
                          std::max(0, bundle.topology.boundary_components - 1);

  SpMat m0l(nv, nv);
  {
    std::vector<Eigen::Triplet<double>> ts;
    for (int v = 0; v < nv; ++v) ts.emplace_back(v, v, ops.lumped_mass[v]);
    m0l.setFromTriplets(ts.begin(), ts.end());
  }
  SpectralResult neu =
      smallest_eigenpairs(ops.stiffness, m0l, std::min(count + 1, nv), opts);
  std::vector<double> nz;
  double lmax = neu.values.cwiseAbs().maxCoeff();
  for (int i = 0; i < neu.values.size(); ++i)
    if (neu.values[i] > 1e-8 * lmax) nz.push_back(neu.values[i]);
  if (nz.size() + 1 != static_cast<size_t>(neu.values.size()))
    throw std::runtime_error("spectrum_via_scalar_reduction: Neumann kernel is not 1-dimensional");
  out.neumann = Eigen::Map<Eigen::VectorXd>(nz.data(), static_cast<int>(nz.size()));

  std::vector<int> interior;
  for (int v = 0; v < nv; ++v)
    if (!bundle.edges.vertex_on_boundary[v]) interior.push_back(v);
  if (interior.empty())
    throw std::runtime_error("spectrum_via_scalar_reduction: no interior vertices");
  SpMat P(static_cast<int>(interior.size()), nv);
  {
    std::vector<Eigen::Triplet<double>> ts;
    for (size_t i = 0; i < interior.size(); ++i)
      ts.emplace_back(static_cast<int>(i), interior[i], 1.0);
    P.setFromTriplets(ts.begin(), ts.end());
  }
  SpMat Kd = SpMat(P * ops.stiffness * P.transpose());
  SpMat Md = SpMat(P * ops.mass * P.transpose());
  SpectralResult dir = smallest_eigenpairs(Kd, Md, std::min(count, (int)Kd.rows()), opts);
  out.dirichlet = dir.values;

  std::vector<double> all(out.zero_multiplicity, 0.0);
  for (int i = 0; i < out.neumann.size(); ++i) all.push_back(out.neumann[i]);
  for (int i = 0; i < out.dirichlet.size(); ++i) all.push_back(out.dirichlet[i]);
  std::sort(all.begin(), all.end());
  out.combined = Eigen::Map<Eigen::VectorXd>(all.data(), static_cast<int>(all.size()));
  return out;
}

// ---------------------------------------------------------------------------
// Exact relative-harmonic forms from boundary data: harmonic extensions of
// locally-constant boundary values c with sum(c) = 0, differentiated. Returns
// k - 1 full-edge cochains vanishing identically on boundary edges; they are
// closed exactly (exact forms) and relative-coclosed exactly (the extension is
// discrete-harmonic at interior vertices).
// ---------------------------------------------------------------------------

inline std::vector<Eigen::VectorXd> dirichlet_exact_basis(const SurfaceBundle& bundle) {
  const auto& loops = bundle.topology.loops;
  const int k = static_cast<int>(loops.size());
  if (k < 1) throw std::runtime_error("dirichlet_exact_basis: mesh has no boundary");
  std::vector<Eigen::VectorXd> basis;
  if (k == 1) return basis;

  ScalarOperators ops = assemble_scalar_operators(bundle.mesh, bundle.edges);
  Incidence inc = build_incidence(bundle.mesh, bundle.edges);
  const int nv = bundle.mesh.vertex_count();
  std::vector<int> interior;
  for (int v = 0; v < nv; ++v)
    if (!bundle.edges.vertex_on_boundary[v]) interior.push_back(v);
  SpMat P(static_cast<int>(interior.size()), nv);
  {
    std::vector<Eigen::Triplet<double>> ts;
    for (size_t i = 0; i < interior.size(); ++i)
      ts.emplace_back(static_cast<int>(i), interior[i], 1.0);
    P.setFromTriplets(ts.begin(), ts.end());
  }
  SpMat Kii = SpMat(P * ops.stiffness * P.transpose());
  Eigen::SimplicialLDLT<SpMat> solver(Kii);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("dirichlet_exact_basis: factorization failed");

  for (int j = 0; j < k - 1; ++j) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(nv);
    for (int l = 0; l < k; ++l) {
      double c = (l == j ? 1.0 : 0.0) - 1.0 / k;  // loop constants with zero sum
      for (int v : loops[l]) g[v] = c;
    }
    Eigen::VectorXd rhs = -(P * (ops.stiffness * g));
    Eigen::VectorXd ui = solver.solve(rhs);
    Eigen::VectorXd u = g + P.transpose() * ui;
    basis.push_back(inc.d0 * u);
  }
  return basis;
}

// ---------------------------------------------------------------------------
// Sharp: Whitney interpolant evaluation. The interpolant is affine per face
// and reproduces edge integrals by construction; its barycenter value is the
// per-face tangent vector used in pointwise probes.
// ---------------------------------------------------------------------------

inline Vec3 whitney_value(const SurfaceMesh& mesh, const EdgeTable& et,
                          const Eigen::VectorXd& cochain, int t, const Vec3& bary) {
  auto g = corner_gradients(mesh, t);
  Vec3 xi = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    int a = i, b = (i + 1) % 3;
    double w = et.tri_signs[t][i] * cochain[et.tri_edges[t][i]];
    xi += w * (bary[a] * g[b] - bary[b] * g[a]);
  }
  return xi;
}

inline std::vector<Vec3> sharp_faces(const SurfaceMesh& mesh, const EdgeTable& et,
                                     const Eigen::VectorXd& cochain) {
  std::vector<Vec3> out(mesh.triangle_count());
  Vec3 bary(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
  for (int t = 0; t < mesh.triangle_count(); ++t)
    out[t] = whitney_value(mesh, et, cochain, t, bary);
  return out;
}

inline std::vector<Vec3> sharp_vertices(const SurfaceMesh& mesh, const EdgeTable& et,
                                        const Eigen::VectorXd& cochain) {
  auto per_face = sharp_faces(mesh, et, cochain);
  std::vector<Vec3> out(mesh.vertices.size(), Vec3::Zero());
  Eigen::VectorXd wsum = Eigen::VectorXd::Zero(mesh.vertex_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double a = triangle_area(mesh, t);
    for (int i = 0; i < 3; ++i) {
      out[mesh.triangles[t][i]] += a * per_face[t];
      wsum[mesh.triangles[t][i]] += a;
    }
  }
  for (int v = 0; v < mesh.vertex_count(); ++v) out[v] /= wsum[v];
  return out;
}

// L2 norm squared of the Whitney interpolant by edge-midpoint quadrature
// (exact: the integrand is quadratic per face). Equals cochain' * M1 * cochain.
inline double whitney_l2_norm_squared(const SurfaceMesh& mesh, const EdgeTable& et,
                                      const Eigen::VectorXd& cochain) {
  double total = 0;
  const Vec3 mids[3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double a = triangle_area(mesh, t);
    for (const Vec3& m : mids)
      total += a / 3.0 * whitney_value(mesh, et, cochain, t, m).squaredNorm();
  }
  return total;
}

// Edge-integral (de Rham) cochain of an ambient vector field along mesh edges,
// by three-point Simpson quadrature on the straight edge.
template <typename FieldFn>
Eigen::VectorXd edge_cochain(const SurfaceMesh& mesh, const EdgeTable& et, FieldFn&& field) {
  Eigen::VectorXd w(et.edge_count());
  for (int e = 0; e < et.edge_count(); ++e) {
    const Vec3 &pa = mesh.vertices[et.edges[e][0]], &pb = mesh.vertices[et.edges[e][1]];
    Vec3 d = pb - pa;
    w[e] = (field(pa).dot(d) + 4.0 * field(0.5 * (pa + pb)).dot(d) + field(pb).dot(d)) / 6.0;
  }
  return w;
}

}  // namespace fbms
