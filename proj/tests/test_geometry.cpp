#include "fbms/geometry.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numbers>

using namespace fbms;

namespace {

SurfaceMesh unit_square() {
  SurfaceMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

}  // namespace

TEST_CASE("cotangent stiffness on the unit square matches the hand computation") {
  SurfaceMesh m = unit_square();
  auto ops = assemble_scalar_operators(m, build_edge_table(m));
  Eigen::MatrixXd K = Eigen::MatrixXd(ops.stiffness);
  Eigen::MatrixXd expect(4, 4);
  expect << 1, -0.5, 0, -0.5,
            -0.5, 1, -0.5, 0,
            0, -0.5, 1, -0.5,
            -0.5, 0, -0.5, 1;
  CHECK((K - expect).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(ops.area == Catch::Approx(1.0));
  // Every boundary vertex sees two half-edges of length 1.
  for (int v = 0; v < 4; ++v) CHECK(ops.boundary_weight[v] == Catch::Approx(1.0));
}

TEST_CASE("scalar operators: kernel, symmetry, mass consistency") {
  SurfaceBundle b = make_surface({SurfaceKind::Catenoid, 6, 0, 2}, 1);
  auto ops = assemble_scalar_operators(b.mesh, b.edges);
  const int nv = b.mesh.vertex_count();
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(nv);
  CHECK((ops.stiffness * ones).cwiseAbs().maxCoeff() < 1e-12);  // constants are flat
  CHECK((Eigen::MatrixXd(ops.stiffness) - Eigen::MatrixXd(ops.stiffness).transpose())
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  CHECK(ops.lumped_mass.sum() == Catch::Approx(ops.area).epsilon(1e-13));
  CHECK(ops.lumped_mass.minCoeff() > 0);

  // Consistent mass has the same row sums as the lumped diagonal.
  auto cons = assemble_scalar_operators(b.mesh, b.edges, MassType::Consistent);
  Eigen::VectorXd rowsum = cons.mass * ones;
  CHECK((rowsum - ops.lumped_mass).cwiseAbs().maxCoeff() < 1e-14);

  // Boundary mass totals the polygonal perimeter of both circles.
  double perim = 0;
  for (int e = 0; e < b.edges.edge_count(); ++e)
    if (b.edges.edge_on_boundary[e])
      perim += (b.mesh.vertices[b.edges.edges[e][1]] - b.mesh.vertices[b.edges.edges[e][0]]).norm();
  CHECK(ops.boundary_weight.sum() == Catch::Approx(perim).epsilon(1e-13));
}

TEST_CASE("Dirichlet energy of linear functions is exact") {
  SurfaceBundle b = make_surface({SurfaceKind::Disk, 5, 0, 1}, 1);
  auto ops = assemble_scalar_operators(b.mesh, b.edges);
  Eigen::VectorXd x(b.mesh.vertex_count());
  for (int v = 0; v < b.mesh.vertex_count(); ++v) x[v] = b.mesh.vertices[v].x();
  // integral of |grad x|^2 over the polygon equals its area, exactly in P1.
  CHECK(x.dot(ops.stiffness * x) == Catch::Approx(ops.area).epsilon(1e-13));
}

TEST_CASE("degenerate triangles abort assembly") {
  SurfaceMesh m = unit_square();
  m.vertices.push_back(Vec3(0.5, 0, 0));
  m.triangles.push_back({0, 1, 4});
  CHECK_THROWS_WITH(assemble_scalar_operators(m, build_edge_table(m)),
                    Catch::Matchers::ContainsSubstring("degenerate"));
}

TEST_CASE("analytic shape field reproduces closed forms at mesh vertices") {
  SurfaceBundle b = make_surface({SurfaceKind::Catenoid, 6, 0, 2}, 1);
  ShapeField f = shape_field(b);
  REQUIRE(f.analytic);
  AnalyticSurface cat = *b.analytic;
  for (int v = 0; v < b.mesh.vertex_count(); v += 7) {
    const Vec3& p = b.mesh.vertices[v];
    CHECK(f.a2[v] == Catch::Approx(cat.norm_A_squared(p)).epsilon(1e-13));
    // Ambient shape operator: trace-free, annihilates the normal, |S|^2 = a2.
    Eigen::Matrix3d S = f.shape_ambient(v);
    CHECK(std::abs(S.trace()) < 1e-13);
    CHECK((S * f.normal[v]).norm() < 1e-13);
    CHECK(S.squaredNorm() == Catch::Approx(f.a2[v]).epsilon(1e-12));
    CHECK((S - S.transpose()).norm() < 1e-13);
  }
}

TEST_CASE("estimated shape field converges to the analytic one") {
  SurfaceDesc desc{SurfaceKind::Catenoid, 6, 0, 2};
  double prev_normal_err = -1, prev_a2_err = -1;
  for (int level : {0, 1, 2}) {
    SurfaceBundle b = make_surface(desc, level);
    ShapeField est = shape_field_estimated(b.mesh, b.edges);
    ShapeField exact = shape_field_analytic(b.mesh, *b.analytic);
    auto dist = distance_to_boundary(b.mesh, b.edges);
    double normal_err = 0, a2_err = 0;
    for (int v = 0; v < b.mesh.vertex_count(); ++v) {
      normal_err = std::max(normal_err, (est.normal[v] - exact.normal[v]).norm());
      if (dist[v] >= 2)  // |A|^2 estimate is one-sided at the boundary
        a2_err = std::max(a2_err, std::abs(est.a2[v] - exact.a2[v]) / exact.a2[v]);
    }
    if (prev_normal_err >= 0) {
      CHECK(normal_err < 0.6 * prev_normal_err);
      CHECK(a2_err < 0.7 * prev_a2_err);
    }
    prev_normal_err = normal_err;
    prev_a2_err = a2_err;
  }
  CHECK(prev_normal_err < 2e-2);
  CHECK(prev_a2_err < 0.10);
}

TEST_CASE("estimated field on the flat disk is exactly flat") {
  SurfaceBundle b = make_surface({SurfaceKind::Disk, 5, 0, 1}, 0);
  ShapeField est = shape_field_estimated(b.mesh, b.edges);
  for (int v = 0; v < b.mesh.vertex_count(); ++v) {
    CHECK((est.normal[v] - Vec3(0, 0, 1)).norm() < 1e-13);
    CHECK(est.a2[v] < 1e-20);
  }
}

TEST_CASE("dihedral-based |A|^2 agrees with the analytic field in the interior") {
  SurfaceBundle b = make_surface({SurfaceKind::Catenoid, 6, 0, 2}, 2);
  ShapeField exact = shape_field_analytic(b.mesh, *b.analytic);
  Eigen::VectorXd a2d = a2_from_dihedrals(b.mesh, b.edges);
  auto dist = distance_to_boundary(b.mesh, b.edges);
  double rel = 0;
  for (int v = 0; v < b.mesh.vertex_count(); ++v)
    if (dist[v] >= 2) rel = std::max(rel, std::abs(a2d[v] - exact.a2[v]) / exact.a2[v]);
  CHECK(rel < 0.10);
}

TEST_CASE("gradients: linear exactness and Jacobians") {
  SurfaceBundle b = make_surface({SurfaceKind::Disk, 5, 0, 1}, 0);
  Eigen::VectorXd u(b.mesh.vertex_count());
  for (int v = 0; v < b.mesh.vertex_count(); ++v)
    u[v] = 3.0 * b.mesh.vertices[v].x() - 2.0 * b.mesh.vertices[v].y() + 0.25;
  for (const Vec3& g : face_gradients(b.mesh, u)) CHECK((g - Vec3(3, -2, 0)).norm() < 1e-12);
  for (const Vec3& g : vertex_gradients(b.mesh, u)) CHECK((g - Vec3(3, -2, 0)).norm() < 1e-12);

  // Jacobian of a linear ambient field on the flat disk: B restricted to the plane.
  Eigen::Matrix3d B;
  B << 1, 2, 0, -1, 0.5, 0, 0.25, -3, 0;
  std::vector<Vec3> field(b.mesh.vertex_count());
  for (int v = 0; v < b.mesh.vertex_count(); ++v) field[v] = B * b.mesh.vertices[v];
  auto J = vertex_jacobians(b.mesh, field);
  for (int v = 0; v < b.mesh.vertex_count(); v += 5) CHECK((J[v] - B).norm() < 1e-12);
}

TEST_CASE("boundary frames: outward conormals") {
  SECTION("disk: conormal is radial") {
    SurfaceBundle b = make_surface({SurfaceKind::Disk, 6, 0, 1}, 1);
    auto normals = estimate_vertex_normals(b.mesh);
    BoundaryFrame bf = boundary_frames(b.mesh, b.edges, b.topology.loops, normals);
    for (int v = 0; v < b.mesh.vertex_count(); ++v) {
      if (bf.loop_of_vertex[v] < 0) continue;
      Vec3 radial = Vec3(b.mesh.vertices[v].x(), b.mesh.vertices[v].y(), 0).normalized();
      CHECK(bf.conormal[v].dot(radial) > 0.999);
    }
  }
  SECTION("catenoid: conormal approaches the position vector (free boundary)") {
    SurfaceBundle b = make_surface({SurfaceKind::Catenoid, 8, 0, 2}, 1);
    auto normals = estimate_vertex_normals(b.mesh);
    BoundaryFrame bf = boundary_frames(b.mesh, b.edges, b.topology.loops, normals);
    for (int v = 0; v < b.mesh.vertex_count(); ++v) {
      if (bf.loop_of_vertex[v] < 0) continue;
      CHECK(bf.conormal[v].dot(b.mesh.vertices[v].normalized()) > 0.995);
    }
  }
}

TEST_CASE("steklov residual of coordinate functions shrinks under refinement") {
  for (SurfaceDesc desc : {SurfaceDesc{SurfaceKind::Disk, 5, 0, 1},
                           SurfaceDesc{SurfaceKind::Catenoid, 6, 0, 2}}) {
    SurfaceBundle b0 = make_surface(desc, 0);
    double r0 = steklov_residual(b0.mesh, b0.edges);
    SurfaceBundle b2 = make_surface(desc, 2);
    double r2 = steklov_residual(b2.mesh, b2.edges);
    INFO(desc.name());
    if (r0 > 1e-10) CHECK(r2 < 0.5 * r0);  // the flat disk is exact at machine precision
    CHECK(r2 < 0.05);
  }
}

TEST_CASE("distance to boundary") {
  SurfaceBundle b = make_surface({SurfaceKind::Disk, 4, 0, 1}, 0);
  auto dist = distance_to_boundary(b.mesh, b.edges);
  CHECK(dist[0] == 4);  // center of a 4-ring disk
  for (int v = 0; v < b.mesh.vertex_count(); ++v)
    CHECK((dist[v] == 0) == b.edges.vertex_on_boundary[v]);
}
