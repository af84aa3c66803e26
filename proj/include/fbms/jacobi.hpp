#pragma once

// Jacobi (stability) operator of a free boundary minimal surface. Everything
// is defined through the quadratic form
//     Q(u) = int_M (|grad u|^2 - |A|^2 u^2) dV + int_dM h u^2 dA,
// where h is the scalar second fundamental form of the container boundary in
// the surface normal direction (unit ball: h = -1). Eigenvalues are min-max
// values of Q over the L2 norm, which keeps the operator-sign question moot:
// the discrete pencil is A = K - M_A2 + M_dh against the lumped mass B.

#include "fbms/eigensolve.hpp"
#include "fbms/hodge.hpp"

namespace fbms {

struct BodyModel {
  std::string name = "unit_ball";
  double (*support)(const Vec3&, const Vec3&) = ball_support;  // h at (point, normal)
};

struct JacobiProblem {
  SpMat A, B;                       // Q-form matrix and lumped mass
  ShapeField shape;
  BodyModel body;
  Eigen::VectorXd lumped_mass;
  Eigen::VectorXd boundary_h;       // h per vertex (0 off the boundary)
  double area = 0;
  double mesh_h = 0;                // mean edge length, drives kernel_tol

  double quadratic_form(const Eigen::VectorXd& u) const { return u.dot(A * u); }
  double mass_norm_squared(const Eigen::VectorXd& u) const { return u.dot(B * u); }
};

inline JacobiProblem assemble_jacobi(const SurfaceBundle& bundle, const ShapeField& shape,
                                     const BodyModel& body = {}) {
  const SurfaceMesh& mesh = bundle.mesh;
  const int nv = mesh.vertex_count();
  if (shape.a2.size() != nv)
    throw std::runtime_error("assemble_jacobi: shape field does not match the mesh");
  ScalarOperators ops = assemble_scalar_operators(mesh, bundle.edges);

  JacobiProblem p;
  p.shape = shape;
  p.body = body;
  p.lumped_mass = ops.lumped_mass;
  p.area = ops.area;
  p.mesh_h = mean_edge_length(mesh, bundle.edges);
  p.boundary_h = Eigen::VectorXd::Zero(nv);
  for (int v = 0; v < nv; ++v)
    if (bundle.edges.vertex_on_boundary[v])
      p.boundary_h[v] = body.support(mesh.vertices[v], shape.normal[v]);

  std::vector<Eigen::Triplet<double>> ts;
  for (int v = 0; v < nv; ++v) {
    double d = -ops.lumped_mass[v] * shape.a2[v] + ops.boundary_weight[v] * p.boundary_h[v];
    if (d != 0.0) ts.emplace_back(v, v, d);
  }
  SpMat D(nv, nv);
  D.setFromTriplets(ts.begin(), ts.end());
  p.A = SpMat(ops.stiffness + D);
  p.B = ops.mass;  // lumped
  return p;
}

// Mesh-aware kernel tolerance: genuine Jacobi fields (ambient isometries of
// the ball) discretize to eigenvalues of size O(h^2), far above the 1e-6
// floor a fixed relative tolerance would allow. Scale by the first eigenvalue
// so the band tracks the physical size of the spectrum.
inline double jacobi_kernel_tol(const JacobiProblem& p, const SpectralResult& r) {
  double scale = std::max(r.values.size() ? std::abs(r.values[0]) : 1.0, 1.0);
  return 2.0 * p.mesh_h * p.mesh_h * scale;
}

inline SpectralResult eigen_jacobi(const JacobiProblem& p, int count, EigenOptions opts = {}) {
  const bool auto_tol = opts.kernel_tol < 0;
  SpectralResult r = smallest_eigenpairs(p.A, p.B, count, opts);
  if (auto_tol) detail::classify_spectrum(r, jacobi_kernel_tol(p, r));
  return r;
}

struct MorseIndex {
  int index = 0;
  int nullity = 0;
  double kernel_tol = 0;
  bool ambiguous = false;  // an eigenvalue sits near the classification edge
  Eigen::VectorXd values;  // the eigenvalues the count was read from
};

inline MorseIndex morse_index(const JacobiProblem& p, EigenOptions opts = {}) {
  const int n = static_cast<int>(p.A.rows());
  int count = std::min(n, 12);
  for (;;) {
    SpectralResult r = eigen_jacobi(p, count, opts);
    if (r.values[r.values.size() - 1] > r.kernel_tol || count == n) {
      MorseIndex m;
      m.index = r.negatives;
      m.nullity = r.zeros;
      m.kernel_tol = r.kernel_tol;
      m.values = r.values;
      for (int i = 0; i < r.values.size(); ++i) {
        double a = std::abs(r.values[i]);
        if (a > 0.5 * r.kernel_tol && a < 2.0 * r.kernel_tol) m.ambiguous = true;
      }
      return m;
    }
    count = std::min(n, 2 * count);  // zero not bracketed yet
  }
}

// ---------------------------------------------------------------------------
// Test functions u = <X_{V,W}, xi> for the eigenvalue comparison argument.
// For constant fields Vbar = e_a, Wbar = e_b the normal components cancel and
// the function reduces to u(v) = N_a xi_b - N_b xi_a pointwise.
// ---------------------------------------------------------------------------

inline int test_form_count(int j) { return 3 * (j - 1) + 1; }  // m(j), n = 2

inline std::array<std::array<int, 2>, 3> constant_field_pairs() {
  return {{{0, 1}, {0, 2}, {1, 2}}};
}

inline Eigen::VectorXd pair_function(const ShapeField& shape, const std::vector<Vec3>& xi,
                                     int a, int b) {
  const int nv = static_cast<int>(xi.size());
  Eigen::VectorXd u(nv);
  for (int v = 0; v < nv; ++v)
    u[v] = shape.normal[v][a] * xi[v][b] - shape.normal[v][b] * xi[v][a];
  return u;
}

struct TestFormSelection {
  Eigen::VectorXd coefficients;  // unit-norm weights over the supplied eigenforms
  Eigen::VectorXd cochain;       // combined full-edge cochain
  std::vector<Vec3> xi;          // dual vertex field of the combination
  double min_singular = 0;       // smallest singular value of the constraint system
  double constraint_residual = 0;  // |C c| relative to the largest singular value
};

// Pick a combination of the first m(j) eigenform cochains whose pair functions
// are mass-orthogonal to the first j-1 Jacobi eigenfunctions: 3(j-1) linear
// constraints on m(j) coefficients, so a null vector always exists.
inline TestFormSelection select_test_form(const SurfaceBundle& bundle, const ShapeField& shape,
                                          const std::vector<Eigen::VectorXd>& eigenform_cochains,
                                          const Eigen::MatrixXd& jacobi_modes,
                                          const Eigen::VectorXd& lumped_mass) {
  const int m = static_cast<int>(eigenform_cochains.size());
  const int jm1 = static_cast<int>(jacobi_modes.cols());
  if (m != 3 * jm1 + 1)
    throw std::runtime_error("select_test_form: need m(j) = 3(j-1)+1 eigenforms");
  const int nv = bundle.mesh.vertex_count();

  std::vector<std::vector<Vec3>> duals(m);
  for (int l = 0; l < m; ++l)
    duals[l] = sharp_vertices(bundle.mesh, bundle.edges, eigenform_cochains[l]);

  TestFormSelection sel;
  if (jm1 == 0) {
    sel.coefficients = Eigen::VectorXd::Unit(1, 0);
    sel.min_singular = 0;
    sel.constraint_residual = 0;
  } else {
    Eigen::MatrixXd C(3 * jm1, m);
    auto pairs = constant_field_pairs();
    for (int l = 0; l < m; ++l)
      for (int i = 0; i < jm1; ++i)
        for (int q = 0; q < 3; ++q) {
          Eigen::VectorXd u = pair_function(shape, duals[l], pairs[q][0], pairs[q][1]);
          C(3 * i + q, l) = (lumped_mass.array() * u.array() * jacobi_modes.col(i).array()).sum();
        }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
    sel.coefficients = svd.matrixV().col(m - 1);
    sel.min_singular = svd.singularValues().minCoeff();
    double smax = std::max(svd.singularValues().maxCoeff(), 1e-300);
    sel.constraint_residual = (C * sel.coefficients).cwiseAbs().maxCoeff() / smax;
  }

  sel.cochain = Eigen::VectorXd::Zero(bundle.edges.edge_count());
  for (int l = 0; l < m; ++l) sel.cochain += sel.coefficients[l] * eigenform_cochains[l];
  sel.xi.assign(nv, Vec3::Zero());
  for (int l = 0; l < m; ++l)
    for (int v = 0; v < nv; ++v) sel.xi[v] += sel.coefficients[l] * duals[l][v];
  return sel;
}

// Aggregate Rayleigh quotient of the three pair functions; the min-max
// principle puts it at or above lambda_j(J) whenever the pair functions are
// mass-orthogonal to the first j-1 eigenfunctions.
inline double pair_rayleigh(const JacobiProblem& p, const std::vector<Vec3>& xi) {
  double num = 0, den = 0;
  for (const auto& pr : constant_field_pairs()) {
    Eigen::VectorXd u = pair_function(p.shape, xi, pr[0], pr[1]);
    num += p.quadratic_form(u);
    den += p.mass_norm_squared(u);
  }
  return num / den;
}

}  // namespace fbms
