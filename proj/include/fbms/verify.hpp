#pragma once

// Numerical verification of the pointwise identities, boundary identities and
// spectral inequalities the index bounds rest on. Each check evaluates both
// sides of one identity in the discrete setting and reports relative residuals
// (max and L2) against a pinned tolerance; interior identities exclude a
// one-ring boundary strip because one-sided stencils pollute the pointwise
// error there. Reports serialize to flat JSON records.

#include <cstdio>
#include <functional>

#include "fbms/jacobi.hpp"

namespace fbms {

enum class CheckId { PPC_A, PPC_B, PC1, LAPIP, JC, BC, IC, ROS, ER, IB };

inline const std::array<std::pair<CheckId, const char*>, 10>& check_id_table() {
  static const std::array<std::pair<CheckId, const char*>, 10> t = {{
      {CheckId::PPC_A, "PPC_A"},
      {CheckId::PPC_B, "PPC_B"},
      {CheckId::PC1, "PC1"},
      {CheckId::LAPIP, "LAPIP"},
      {CheckId::JC, "JC"},
      {CheckId::BC, "BC"},
      {CheckId::IC, "IC"},
      {CheckId::ROS, "ROS"},
      {CheckId::ER, "ER"},
      {CheckId::IB, "IB"},
  }};
  return t;
}

inline std::string to_string(CheckId id) {
  for (const auto& [k, s] : check_id_table())
    if (k == id) return s;
  return "?";
}

inline CheckId check_id_from_string(const std::string& s) {
  for (const auto& [k, name] : check_id_table())
    if (s == name) return k;
  throw std::invalid_argument("unknown check id: " + s);
}

struct CheckReport {
  std::string check_id;
  std::string surface;
  int level = 0;
  double residual_max = 0;
  double residual_l2 = 0;
  double tolerance = 0;
  bool pass = false;  // always residual_max <= tolerance
  double rate = std::numeric_limits<double>::quiet_NaN();  // set across ladders
};

inline CheckReport make_report(CheckId id, const std::string& surface, int level,
                               double residual_max, double residual_l2, double tolerance) {
  CheckReport r;
  r.check_id = to_string(id);
  r.surface = surface;
  r.level = level;
  r.residual_max = residual_max;
  r.residual_l2 = residual_l2;
  r.tolerance = tolerance;
  r.pass = residual_max <= tolerance;
  return r;
}

inline std::string json_number(double x) {
  if (!std::isfinite(x)) return "null";  // JSON has no NaN/inf
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string to_json(const CheckReport& r) {
  std::string s = "{\"check_id\":\"" + r.check_id + "\",\"surface\":\"" + r.surface + "\"";
  s += ",\"level\":" + std::to_string(r.level);
  s += ",\"residual_max\":" + json_number(r.residual_max);
  s += ",\"residual_l2\":" + json_number(r.residual_l2);
  s += ",\"tolerance\":" + json_number(r.tolerance);
  s += std::string(",\"pass\":") + (r.pass ? "true" : "false");
  s += ",\"rate\":" + json_number(r.rate) + "}";
  return s;
}

// ---------------------------------------------------------------------------
// Quadrature on the unit sphere carrying the measure 3/(4 pi) dA, total mass 3.
// ---------------------------------------------------------------------------

struct SphereQuadrature {
  std::vector<Vec3> nodes;
  std::vector<double> weights;  // positive, summing to 3
  int exactness = 0;            // polynomial degree integrated exactly; -1 for MC
};

// Product rule: 2-point Gauss-Legendre in z times 4 uniform angles. Exact for
// total degree <= 3 (the z-rule handles cubics, the angular rule kills every
// e^{i m theta} with 0 < |m| < 4).
inline SphereQuadrature product_gauss_sphere() {
  SphereQuadrature q;
  q.exactness = 3;
  const double zs[2] = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
  for (double z : zs) {
    double rho = std::sqrt(1.0 - z * z);
    for (int j = 0; j < 4; ++j) {
      double th = 0.5 * std::numbers::pi * j;
      q.nodes.emplace_back(rho * std::cos(th), rho * std::sin(th), z);
      q.weights.push_back(3.0 / 8.0);
    }
  }
  return q;
}

// Equal-area cylindrical sampling; fallback cross-check for the closed-form
// rule. Draws uniforms straight from the engine for portable determinism.
inline SphereQuadrature monte_carlo_sphere(std::size_t samples = 100000,
                                           std::uint64_t seed = 0x5eedULL) {
  SphereQuadrature q;
  q.exactness = -1;
  std::mt19937_64 rng(seed);
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  q.nodes.reserve(samples);
  q.weights.assign(samples, 3.0 / static_cast<double>(samples));
  for (std::size_t i = 0; i < samples; ++i) {
    double z = 2.0 * unit() - 1.0;
    double th = 2.0 * std::numbers::pi * unit();
    double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    q.nodes.emplace_back(rho * std::cos(th), rho * std::sin(th), z);
  }
  return q;
}

inline double sphere_pair_integral(const SphereQuadrature& q, int a, int b) {
  double s = 0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * q.nodes[i][a] * q.nodes[i][b];
  return s;
}

// ---------------------------------------------------------------------------
// Residual bookkeeping: relative max norm and mass-weighted relative L2 norm,
// both against the larger of the two sides so that identically-zero identities
// come out as residual 0 rather than 0/0.
// ---------------------------------------------------------------------------

namespace detail {

// The floor keeps identities that hold as 0 = 0 (flat disk: S vanishes, N is
// constant) from dividing roundoff by roundoff; every field entering the
// pointwise identities is O(1) on a unit-ball-scale surface, so 1 is the
// honest characteristic magnitude.
struct ResidualAccumulator {
  double floor = 0;
  double raw_max = 0, scale_max = 0;
  double diff2 = 0, lhs2 = 0, rhs2 = 0, wsum = 0;

  explicit ResidualAccumulator(double floor_ = 0) : floor(floor_) {}

  void add(double w, double diff, double lhs, double rhs) {
    raw_max = std::max(raw_max, std::abs(diff));
    scale_max = std::max({scale_max, std::abs(lhs), std::abs(rhs)});
    diff2 += w * diff * diff;
    lhs2 += w * lhs * lhs;
    rhs2 += w * rhs * rhs;
    wsum += w;
  }
  double rel_max() const {
    double s = std::max(scale_max, floor);
    return s > 0 ? raw_max / s : 0.0;
  }
  double rel_l2() const {
    double s = std::max({lhs2, rhs2, floor * floor * wsum});
    return s > 0 ? std::sqrt(diff2 / s) : 0.0;
  }
};

// Interior strip plus a valence cap: fan apexes (the disk mesh's centre has
// valence equal to its angular resolution) carry an O(1) pointwise stencil
// error that refinement never removes. Those single vertices are artifacts of
// the mesh family, not counterexamples to an identity.
inline std::vector<char> interior_mask(const SurfaceMesh& mesh, const EdgeTable& et) {
  auto dist = distance_to_boundary(mesh, et);
  std::vector<int> valence(mesh.vertex_count(), 0);
  for (const auto& e : et.edges) {
    ++valence[e[0]];
    ++valence[e[1]];
  }
  std::vector<char> keep(mesh.vertex_count(), 0);
  for (int v = 0; v < mesh.vertex_count(); ++v) keep[v] = dist[v] >= 2 && valence[v] <= 10;
  return keep;
}

inline void require_analytic(const SurfaceBundle& b, CheckId id) {
  if (!b.analytic)
    throw std::invalid_argument(to_string(id) + " needs an analytic shape operator; " +
                                b.desc.name() + " provides none");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Closed-form test 1-forms with known Laplacian. The pointwise identity
// checks need smooth vertex samples: reconstructions of solved cochains carry
// lattice-scale noise that second-order stencils amplify to O(1), which says
// nothing about the identities themselves.
// ---------------------------------------------------------------------------

struct AnalyticTestForm {
  std::function<Vec3(const Vec3&)> field;  // the sharp of xi, tangent to the surface
  double lambda = 0;                       // Delta_1 xi = lambda xi; 0 = harmonic
};

// First positive root of J_1' (the lowest nonzero Neumann eigenvalue of the
// unit disk is its square).
inline double disk_neumann_root() {
  auto f = [](double x) { return std::cyl_bessel_j(0.0, x) - std::cyl_bessel_j(1.0, x) / x; };
  double lo = 1.5, hi = 2.2;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

inline AnalyticTestForm analytic_test_form(const SurfaceBundle& b) {
  AnalyticTestForm f;
  switch (b.desc.kind) {
    case SurfaceKind::Catenoid:
      // dtheta: closed, and coclosed because *dtheta = dt is exact. Tangent to
      // any surface of revolution about the z axis.
      f.field = [](const Vec3& p) {
        double r2 = p[0] * p[0] + p[1] * p[1];
        return Vec3(-p[1] / r2, p[0] / r2, 0.0);
      };
      f.lambda = 0.0;
      return f;
    case SurfaceKind::Disk: {
      // d of the first nonzero Neumann eigenfunction J_1(kr) cos(theta);
      // exterior derivative commutes with the Laplacian, so lambda = k^2.
      double k = disk_neumann_root();
      f.lambda = k * k;
      f.field = [k](const Vec3& p) {
        double r = std::hypot(p[0], p[1]);
        if (r < 1e-9) return Vec3(0.5 * k, 0.0, 0.0);
        double ct = p[0] / r, st = p[1] / r;
        double j1 = std::cyl_bessel_j(1.0, k * r);
        double ur = k * (std::cyl_bessel_j(0.0, k * r) - j1 / (k * r)) * ct;  // du/dr
        double ut = -j1 * st / r;  // (1/r) du/dtheta
        return Vec3(ur * ct - ut * st, ur * st + ut * ct, 0.0);
      };
      return f;
    }
    default:
      throw std::invalid_argument("no closed-form test 1-form for " + b.desc.name());
  }
}

// ---------------------------------------------------------------------------
// Identity checks. Interior ones (PPC_A, PPC_B, LAPIP, JC) compare pointwise
// fields away from the boundary strip; BC lives on the boundary; PC1 measures
// the weak codifferential of pullback cochains on a fixed geodesic-interior
// subdomain; IC is pure quadrature; ROS is a single scalar identity per
// harmonic form.
// ---------------------------------------------------------------------------

inline CheckReport check_ppc_a(const SurfaceBundle& b) {
  detail::require_analytic(b, CheckId::PPC_A);
  ShapeField sf = shape_field(b);
  ScalarOperators ops = assemble_scalar_operators(b.mesh, b.edges);
  auto keep = detail::interior_mask(b.mesh, b.edges);
  detail::ResidualAccumulator acc(1.0);
  for (int a = 0; a < 3; ++a) {
    Eigen::VectorXd u(b.mesh.vertex_count());
    for (int v = 0; v < b.mesh.vertex_count(); ++v) u[v] = sf.normal[v][a];
    auto grad = vertex_gradients(b.mesh, u);
    for (int v = 0; v < b.mesh.vertex_count(); ++v) {
      if (!keep[v]) continue;
      Vec3 lhs = grad[v];
      Vec3 rhs = -sf.apply(v, Vec3::Unit(a));  // S annihilates the normal part
      acc.add(ops.lumped_mass[v], (lhs - rhs).norm(), lhs.norm(), rhs.norm());
    }
  }
  return make_report(CheckId::PPC_A, b.desc.name(), b.level, acc.rel_max(), acc.rel_l2(), 0.05);
}

inline CheckReport check_ppc_b(const SurfaceBundle& b) {
  detail::require_analytic(b, CheckId::PPC_B);
  ShapeField sf = shape_field(b);
  ScalarOperators ops = assemble_scalar_operators(b.mesh, b.edges);
  auto keep = detail::interior_mask(b.mesh, b.edges);
  detail::ResidualAccumulator acc(1.0);
  for (int a = 0; a < 3; ++a) {
    Eigen::VectorXd u(b.mesh.vertex_count());
    for (int v = 0; v < b.mesh.vertex_count(); ++v) u[v] = sf.normal[v][a];
    Eigen::VectorXd ku = ops.stiffness * u;
    for (int v = 0; v < b.mesh.vertex_count(); ++v) {
      if (!keep[v]) continue;
      double lhs = ku[v] / ops.lumped_mass[v];  // positive Laplacian
      double rhs = sf.a2[v] * u[v];
      acc.add(ops.lumped_mass[v], lhs - rhs, lhs, rhs);
    }
  }
  return make_report(CheckId::PPC_B, b.desc.name(), b.level, acc.rel_max(), acc.rel_l2(), 0.05);
}

// Delta<V,xi> = 2<S(V),S(xi)> + <V,Delta xi> - 2<Vbar,N><S,grad xi> with both
// V and xi tangent parts of constant fields, so Delta xi = 0 and the Frobenius
// term collapses to <Wbar,N>|S|^2; every right-hand term is then analytic.
inline CheckReport check_lapip(const SurfaceBundle& b) {
  detail::require_analytic(b, CheckId::LAPIP);
  ShapeField sf = shape_field(b);
  ScalarOperators ops = assemble_scalar_operators(b.mesh, b.edges);
  auto keep = detail::interior_mask(b.mesh, b.edges);
  detail::ResidualAccumulator acc(1.0);
  for (int a = 0; a < 3; ++a)
    for (int c = a; c < 3; ++c) {
      Eigen::VectorXd u(b.mesh.vertex_count());
      for (int v = 0; v < b.mesh.vertex_count(); ++v)
        u[v] = (a == c ? 1.0 : 0.0) - sf.normal[v][a] * sf.normal[v][c];
      Eigen::VectorXd ku = ops.stiffness * u;
      for (int v = 0; v < b.mesh.vertex_count(); ++v) {
        if (!keep[v]) continue;
        const Vec3& N = sf.normal[v];
        double lhs = ku[v] / ops.lumped_mass[v];
        double rhs = 2.0 * sf.apply(v, Vec3::Unit(a)).dot(sf.apply(v, Vec3::Unit(c))) -
                     2.0 * N[a] * N[c] * sf.a2[v];
        acc.add(ops.lumped_mass[v], lhs - rhs, lhs, rhs);
      }
    }
  return make_report(CheckId::LAPIP, b.desc.name(), b.level, acc.rel_max(), acc.rel_l2(), 0.05);
}

// J u = <X_{V,W}, Delta xi> + 2v for u = <X_{V,W}, xi>. xi is an analytic
// eigenform (harmonic on the catenoid), so the first right-hand term is
// lambda u exactly; v takes the covariant derivative of xi as the tangential
// part of the PL vertex Jacobian.
inline CheckReport check_jc(const SurfaceBundle& b) {
  detail::require_analytic(b, CheckId::JC);
  ShapeField sf = shape_field(b);
  ScalarOperators ops = assemble_scalar_operators(b.mesh, b.edges);
  auto keep = detail::interior_mask(b.mesh, b.edges);
  AnalyticTestForm tf = analytic_test_form(b);
  std::vector<Vec3> xi(b.mesh.vertex_count());
  for (int v = 0; v < b.mesh.vertex_count(); ++v) xi[v] = tf.field(b.mesh.vertices[v]);
  auto jac = vertex_jacobians(b.mesh, xi);
  detail::ResidualAccumulator acc(1.0);
  for (auto [a, c] : constant_field_pairs()) {
    Eigen::VectorXd u = pair_function(sf, xi, a, c);
    Eigen::VectorXd ku = ops.stiffness * u;
    for (int v = 0; v < b.mesh.vertex_count(); ++v) {
      if (!keep[v]) continue;
      const Vec3& N = sf.normal[v];
      double lhs = ku[v] / ops.lumped_mass[v] - sf.a2[v] * u[v];
      Vec3 dv = jac[v] * sf.apply(v, Vec3::Unit(a));  // ambient D_{S(V)} xi
      Vec3 dw = jac[v] * sf.apply(v, Vec3::Unit(c));
      dv -= N * N.dot(dv);
      dw -= N * N.dot(dw);
      double rhs = tf.lambda * u[v] + 2.0 * (dv[c] - dw[a]);
      acc.add(ops.lumped_mass[v], lhs - rhs, lhs, rhs);
    }
  }
  return make_report(CheckId::JC, b.desc.name(), b.level, acc.rel_max(), acc.rel_l2(), 0.05);
}

// Pullbacks of ambient constant 1-forms are d of the coordinate functions, so
// they are closed cochains exactly; minimality makes them weakly coclosed in
// the limit. The codifferential residual is measured on the fixed geodesic
// subdomain {dist >= margin} and scaled by sqrt(lambda_1) of the 1-form
// spectrum, the natural inverse-length of the problem.
inline CheckReport check_pc1(const SurfaceBundle& b, double margin = 0.25) {
  HodgeProblem hp = assemble_one_form_laplacian(b, OneFormBC::Absolute);
  EigenOptions opts;
  opts.want_vectors = false;
  SpectralResult r = eigen_one_form(hp, hp.beta_expected + 3, opts);
  double lam1 = r.values[std::min<int>(r.zeros, static_cast<int>(r.values.size()) - 1)];
  auto gd = geodesic_distance_to_boundary(b.mesh, b.edges);
  bool any = false;
  for (int v = 0; v < b.mesh.vertex_count(); ++v) any = any || gd[v] >= margin;
  std::vector<char> keep(b.mesh.vertex_count(), 0);
  if (any)
    for (int v = 0; v < b.mesh.vertex_count(); ++v) keep[v] = gd[v] >= margin;
  else
    keep = detail::interior_mask(b.mesh, b.edges);  // mesh too coarse for the margin

  double worst = 0, sum2 = 0;
  for (int a = 0; a < 3; ++a) {
    Eigen::VectorXd xa(b.mesh.vertex_count());
    for (int v = 0; v < b.mesh.vertex_count(); ++v) xa[v] = b.mesh.vertices[v][a];
    Eigen::VectorXd omega = hp.incidence.d0 * xa;
    double closed = (hp.incidence.d1 * omega).cwiseAbs().maxCoeff();  // structural zero
    Eigen::VectorXd div = hp.incidence.d0.transpose() * (hp.m1 * omega);
    double num = 0;
    for (int v = 0; v < b.mesh.vertex_count(); ++v) {
      if (!keep[v]) continue;
      double dv = div[v] / hp.m0_lumped[v];
      num += hp.m0_lumped[v] * dv * dv;
    }
    double den = std::sqrt(lam1) * std::sqrt(omega.dot(hp.m1 * omega));
    double rel = den > 0 ? std::sqrt(num) / den : 0.0;
    rel = std::max(rel, closed);
    worst = std::max(worst, rel);
    sum2 += rel * rel;
  }
  return make_report(CheckId::PC1, b.desc.name(), b.level, worst, std::sqrt(sum2 / 3.0), 0.05);
}

// <grad_eta xi, xi> = h |xi|^2 at the boundary, for forms satisfying absolute
// conditions. One-sided stencils cap this at first order.
inline CheckReport check_bc(const SurfaceBundle& b) {
  ShapeField sf = shape_field(b);
  ScalarOperators ops = assemble_scalar_operators(b.mesh, b.edges);
  auto loops = boundary_loops(b.mesh, b.edges);
  if (loops.empty()) throw std::invalid_argument("BC needs a boundary");
  BoundaryFrame bf = boundary_frames(b.mesh, b.edges, loops, sf.normal);
  AnalyticTestForm tf = analytic_test_form(b);
  std::vector<Vec3> xi(b.mesh.vertex_count());
  for (int v = 0; v < b.mesh.vertex_count(); ++v) xi[v] = tf.field(b.mesh.vertices[v]);
  auto jac = vertex_jacobians(b.mesh, xi);
  BodyModel body;
  detail::ResidualAccumulator acc;
  for (int v = 0; v < b.mesh.vertex_count(); ++v) {
    if (bf.loop_of_vertex[v] < 0) continue;
    double lhs = (jac[v] * bf.conormal[v]).dot(xi[v]);
    double rhs = body.support(b.mesh.vertices[v], sf.normal[v]) * xi[v].squaredNorm();
    acc.add(ops.boundary_weight[v], lhs - rhs, lhs, rhs);
  }
  return make_report(CheckId::BC, b.desc.name(), b.level, acc.rel_max(), acc.rel_l2(), 0.10);
}

inline CheckReport check_ic(const SphereQuadrature& q) {
  detail::ResidualAccumulator acc;
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 3; ++c) {
      double got = sphere_pair_integral(q, a, c);
      double want = a == c ? 1.0 : 0.0;
      acc.add(1.0, got - want, got, want);
    }
  double tol = q.exactness >= 2 ? 1e-12 : 0.01;
  return make_report(CheckId::IC, "sphere", 0, acc.rel_max(), acc.rel_l2(), tol);
}

// Q(xi, xi) = sum_i Q(xi_i, xi_i) = 2 int_dM h |xi|^2 < 0 for harmonic
// absolute 1-forms: the quadratic form is evaluated componentwise through the
// Jacobi pencil, the right side through the boundary mass.
inline CheckReport check_ros(const SurfaceBundle& b) {
  ShapeField sf = shape_field(b);
  JacobiProblem jp = assemble_jacobi(b, sf);
  ScalarOperators ops = assemble_scalar_operators(b.mesh, b.edges);
  HodgeProblem hp = assemble_one_form_laplacian(b, OneFormBC::Absolute);
  if (hp.beta_expected < 1)
    throw std::invalid_argument("ROS needs a harmonic 1-form; " + b.desc.name() +
                                " has first Betti number 0");
  SpectralResult r = eigen_one_form(hp, hp.beta_expected + 1);
  detail::ResidualAccumulator acc;
  bool all_negative = true;
  for (int i = 0; i < hp.beta_expected; ++i) {
    Eigen::VectorXd omega = hp.expand(r.vectors.col(i));
    auto xi = sharp_vertices(b.mesh, b.edges, omega);
    double q = 0;
    for (int c = 0; c < 3; ++c) {
      Eigen::VectorXd u(b.mesh.vertex_count());
      for (int v = 0; v < b.mesh.vertex_count(); ++v) u[v] = xi[v][c];
      q += jp.quadratic_form(u);
    }
    double rhs = 0;
    for (int v = 0; v < b.mesh.vertex_count(); ++v)
      rhs += 2.0 * ops.boundary_weight[v] * jp.boundary_h[v] * xi[v].squaredNorm();
    all_negative = all_negative && q < 0;
    acc.add(1.0, q - rhs, q, rhs);
  }
  double rmax = acc.rel_max();
  if (!all_negative) rmax = std::max(rmax, 1.0);  // wrong sign can never pass
  return make_report(CheckId::ROS, b.desc.name(), b.level, rmax, acc.rel_l2(), 0.10);
}

inline CheckReport run_identity_check(CheckId id, const SurfaceBundle& b) {
  switch (id) {
    case CheckId::PPC_A: return check_ppc_a(b);
    case CheckId::PPC_B: return check_ppc_b(b);
    case CheckId::PC1: return check_pc1(b);
    case CheckId::LAPIP: return check_lapip(b);
    case CheckId::JC: return check_jc(b);
    case CheckId::BC: return check_bc(b);
    case CheckId::IC: return check_ic(product_gauss_sphere());
    case CheckId::ROS: return check_ros(b);
    default: throw std::invalid_argument(to_string(id) + " is not an identity check");
  }
}

inline CheckReport run_identity_check(CheckId id, const SurfaceDesc& desc, int level) {
  return run_identity_check(id, make_surface(desc, level));
}

// log2 error ratio between consecutive levels; NaN when not monotone.
inline double convergence_rate(double coarse, double fine) {
  if (!(coarse > 0) || !(fine > 0) || fine >= coarse)
    return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

inline std::vector<CheckReport> run_identity_ladder(CheckId id, const SurfaceDesc& desc,
                                                    const std::vector<int>& levels) {
  std::vector<CheckReport> out;
  for (int l : levels) out.push_back(run_identity_check(id, desc, l));
  for (std::size_t i = 1; i < out.size(); ++i)
    out[i].rate = convergence_rate(out[i - 1].residual_max, out[i].residual_max);
  return out;
}

// ---------------------------------------------------------------------------
// Spectral comparison lambda_j(J) <= lambda_{m(j)}(Delta_1), m(j) = 3(j-1)+1,
// with slack eps_h = 5% of the larger spectral magnitude in play; whenever
// m(j) lands inside the harmonic range the left side must be strictly
// negative on its own.
// ---------------------------------------------------------------------------

struct ComparisonTable {
  Eigen::VectorXd jacobi;  // lambda_1 .. lambda_jmax of J
  Eigen::VectorXd hodge;   // lambda_1 .. lambda_m(jmax) of Delta_1, absolute
  int beta = 0;            // expected harmonic dimension
  CheckReport report;
};

inline ComparisonTable eigenvalue_comparison_table(const SurfaceBundle& b, int j_max) {
  ShapeField sf = shape_field(b);
  JacobiProblem jp = assemble_jacobi(b, sf);
  EigenOptions opts;
  opts.want_vectors = false;
  SpectralResult jr = eigen_jacobi(jp, j_max, opts);
  HodgeProblem hp = assemble_one_form_laplacian(b, OneFormBC::Absolute);
  SpectralResult hr = eigen_one_form(hp, test_form_count(j_max), opts);
  if (jr.values.size() < j_max || hr.values.size() < test_form_count(j_max))
    throw std::runtime_error("eigenvalue_comparison_table: too few converged eigenvalues");

  ComparisonTable table;
  table.jacobi = jr.values;
  table.hodge = hr.values;
  table.beta = hp.beta_expected;

  const double scale0 = std::abs(jr.values[0]);
  double worst = -std::numeric_limits<double>::infinity();
  double viol2 = 0;
  bool strict_ok = true;
  for (int j = 1; j <= j_max; ++j) {
    int m = test_form_count(j);
    double lj = jr.values[j - 1];
    double lm = hr.values[m - 1];
    double denom = std::max({std::abs(lm), scale0, 1e-300});
    double rj = (lj - lm) / denom;
    worst = std::max(worst, rj);
    viol2 += std::max(rj, 0.0) * std::max(rj, 0.0);
    if (m <= hp.beta_expected && !(lj < 0)) strict_ok = false;
  }
  if (!strict_ok) worst = std::max(worst, 1.0);
  table.report =
      make_report(CheckId::ER, b.desc.name(), b.level, worst, std::sqrt(viol2 / j_max), 0.05);
  return table;
}

inline CheckReport check_eigenvalue_inequality(const SurfaceBundle& b, int j_max) {
  return eigenvalue_comparison_table(b, j_max).report;
}

// ---------------------------------------------------------------------------
// Index lower bound: Ind >= floor((beta + 2) / 3) with beta = 2g + k - 1;
// every free boundary surface is at least unstable, so the requirement never
// drops below 1. The Morse index must agree across the two finest levels.
// ---------------------------------------------------------------------------

inline int index_lower_bound(int genus, int boundaries) {
  return (2 * genus + boundaries + 1) / 3;
}

inline CheckReport check_index_bounds(const SurfaceBundle& coarse, const SurfaceBundle& fine) {
  MorseIndex mc = morse_index(assemble_jacobi(coarse, shape_field(coarse)));
  MorseIndex mf = morse_index(assemble_jacobi(fine, shape_field(fine)));
  if (mc.ambiguous || mf.ambiguous)
    throw std::runtime_error("check_index_bounds: kernel ambiguity leaves the index inconclusive");
  if (mc.index != mf.index)
    throw std::runtime_error("check_index_bounds: Morse index not stable under refinement");
  int g = fine.topology.genus;
  int k = fine.topology.boundary_components;
  int required = std::max(index_lower_bound(g, k), k > 0 ? 1 : 0);
  double gap = static_cast<double>(required - mf.index);
  return make_report(CheckId::IB, fine.desc.name(), fine.level, gap, gap, 0.0);
}

inline CheckReport check_index_bounds(const SurfaceDesc& desc, int level) {
  if (level < 1)
    throw std::invalid_argument("check_index_bounds: need level >= 1 for a refinement pair");
  return check_index_bounds(make_surface(desc, level - 1), make_surface(desc, level));
}

}  // namespace fbms
