#include "fbms/mesh.hpp"
#include "fbms/mesh_io.hpp"
#include "fbms/surfaces.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <numbers>

using namespace fbms;

namespace {

SurfaceMesh two_triangle_square() {
  SurfaceMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

}  // namespace

TEST_CASE("edge table: canonical ordering and adjacency") {
  SurfaceMesh m = two_triangle_square();
  EdgeTable et = build_edge_table(m);
  REQUIRE(et.edge_count() == 5);
  // Lexicographic canonical order: (0,1),(0,2),(0,3),(1,2),(2,3)
  CHECK(et.edges[0] == std::array<int, 2>{0, 1});
  CHECK(et.edges[1] == std::array<int, 2>{0, 2});
  CHECK(et.edges[4] == std::array<int, 2>{2, 3});
  CHECK(et.boundary_edge_count() == 4);
  // The diagonal (0,2) is interior with both triangles attached.
  CHECK(et.edge_tris[1][0] == 0);
  CHECK(et.edge_tris[1][1] == 1);
  CHECK_FALSE(et.edge_on_boundary[1]);
  // Traversal signs: triangle 0 walks 0->1 (canonical) and 2->0 (reversed).
  CHECK(et.tri_signs[0][0] == 1);
  CHECK(et.tri_signs[0][2] == -1);
  // Every boundary vertex flagged.
  for (int v = 0; v < 4; ++v) CHECK(et.vertex_on_boundary[v]);
}

TEST_CASE("validate_mesh: clean meshes pass") {
  for (auto mesh : {make_disk_mesh(4, 16), make_catenoid_mesh(6), make_synthetic_mesh(1, 2)}) {
    MeshDiagnostics d = validate_mesh(mesh);
    CHECK(d.ok());
    CHECK(d.connected_components == 1);
  }
}

TEST_CASE("validate_mesh: diagnostics catch defects") {
  SECTION("flipped triangle breaks orientation") {
    SurfaceMesh m = two_triangle_square();
    std::swap(m.triangles[1][1], m.triangles[1][2]);
    MeshDiagnostics d = validate_mesh(m);
    CHECK_FALSE(d.orientation_consistent);
    CHECK_FALSE(d.conflicting_edges.empty());
  }
  SECTION("three triangles on one edge is non-manifold") {
    SurfaceMesh m = two_triangle_square();
    m.vertices.emplace_back(0.5, 0.5, 1.0);
    m.triangles.push_back({0, 4, 2});
    MeshDiagnostics d = validate_mesh(m);
    CHECK_FALSE(d.edge_manifold);
    CHECK_THROWS(build_edge_table(m));
  }
  SECTION("degenerate triangle reported") {
    SurfaceMesh m = two_triangle_square();
    m.vertices.emplace_back(0.5, 0.0, 0.0);  // collinear with edge (0,1)
    m.triangles.push_back({0, 1, 4});
    MeshDiagnostics d = validate_mesh(m);
    REQUIRE(d.degenerate_triangles.size() == 1);
    CHECK(d.degenerate_triangles[0] == 2);
  }
  SECTION("duplicate vertices counted") {
    SurfaceMesh m = two_triangle_square();
    m.vertices.push_back(m.vertices[0] + Vec3(1e-14, 0, 0));
    m.triangles.push_back({4, 1, 2});
    MeshDiagnostics d = validate_mesh(m);
    CHECK(d.duplicate_vertex_pairs >= 1);
  }
  SECTION("bowtie boundary is not simple") {
    SurfaceMesh m;
    m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0), Vec3(0, -1, 0)};
    m.triangles = {{0, 1, 2}, {0, 3, 4}};  // two fans sharing only vertex 0
    MeshDiagnostics d = validate_mesh(m);
    CHECK_FALSE(d.boundary_simple);
  }
}

TEST_CASE("boundary loops are oriented with the surface on the left") {
  SurfaceMesh m = make_disk_mesh(4, 16);
  EdgeTable et = build_edge_table(m);
  auto loops = boundary_loops(m, et);
  REQUIRE(loops.size() == 1);
  CHECK(loops[0].size() == 16);
  // Counterclockwise traversal in the plane: positive signed area.
  double signed_area = 0;
  const auto& L = loops[0];
  for (size_t i = 0; i < L.size(); ++i) {
    const Vec3& p = m.vertices[L[i]];
    const Vec3& q = m.vertices[L[(i + 1) % L.size()]];
    signed_area += 0.5 * (p.x() * q.y() - q.x() * p.y());
  }
  CHECK(signed_area > 0);
}

TEST_CASE("build_topology: Euler characteristic, genus, boundary count") {
  struct Case {
    SurfaceMesh mesh;
    int genus, k, euler;
  };
  std::vector<Case> cases;
  cases.push_back({make_disk_mesh(4, 16), 0, 1, 1});
  cases.push_back({make_catenoid_mesh(6), 0, 2, 0});
  cases.push_back({make_synthetic_mesh(1, 1), 1, 1, -1});
  cases.push_back({make_synthetic_mesh(2, 1), 2, 1, -3});
  cases.push_back({make_synthetic_mesh(0, 3), 0, 3, -1});
  cases.push_back({make_torus_with_hole_mesh(4), 1, 1, -1});
  for (const auto& c : cases) {
    MeshTopology topo = build_topology(c.mesh, build_edge_table(c.mesh));
    CHECK(topo.genus == c.genus);
    CHECK(topo.boundary_components == c.k);
    CHECK(topo.euler == c.euler);
    CHECK(topo.vertices - topo.edges + topo.faces == topo.euler);
  }
}

TEST_CASE("refine: counts, orientation, area convergence") {
  SurfaceMesh m = make_disk_mesh(4, 16);
  EdgeTable et = build_edge_table(m);
  SurfaceMesh r = refine(m);
  CHECK(r.vertex_count() == m.vertex_count() + et.edge_count());
  CHECK(r.triangle_count() == 4 * m.triangle_count());
  CHECK(validate_mesh(r).ok());
  // Orientation is inherited: all face normals keep pointing +z.
  for (int t = 0; t < r.triangle_count(); ++t) {
    Vec3 n = (r.vertices[r.triangles[t][1]] - r.vertices[r.triangles[t][0]])
                 .cross(r.vertices[r.triangles[t][2]] - r.vertices[r.triangles[t][0]]);
    CHECK(n.z() > 0);
  }
  // Without a projector the total area is preserved exactly.
  CHECK(total_area(r) == Catch::Approx(total_area(m)).epsilon(1e-14));

  // With the disk projector the polygonal area converges to pi at O(h^2).
  AnalyticSurface disk = AnalyticSurface::disk();
  SurfaceProjector proj = disk.projector();
  SurfaceMesh cur = m;
  double prev_err = std::abs(total_area(cur) - std::numbers::pi);
  for (int l = 0; l < 2; ++l) {
    cur = refine(cur, &proj);
    double err = std::abs(total_area(cur) - std::numbers::pi);
    CHECK(err < 0.3 * prev_err);  // comfortably below the 4x of exact O(h^2)
    prev_err = err;
  }
  // Reprojected boundary vertices sit on the unit circle.
  EdgeTable cet = build_edge_table(cur);
  for (int v = 0; v < cur.vertex_count(); ++v)
    if (cet.vertex_on_boundary[v])
      CHECK(std::hypot(cur.vertices[v].x(), cur.vertices[v].y()) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("refine: projector failure reports the offending vertex") {
  SurfaceMesh m = two_triangle_square();
  SurfaceProjector bad;
  bad.to_surface = [](const Vec3&) -> Vec3 { throw std::runtime_error("no convergence"); };
  bad.to_boundary = [](const Vec3& p) { return p; };
  CHECK_THROWS_WITH(refine(m, &bad), Catch::Matchers::ContainsSubstring("midpoint of edge"));
}

TEST_CASE("mesh io: OFF and OBJ round-trip bit-exactly") {
  namespace fs = std::filesystem;
  SurfaceMesh m = make_catenoid_mesh(5);
  fs::path dir = fs::temp_directory_path() / "fbms_io_test";
  fs::create_directories(dir);

  write_off(dir / "m.off", m);
  SurfaceMesh back = read_off(dir / "m.off");
  REQUIRE(back.vertex_count() == m.vertex_count());
  REQUIRE(back.triangle_count() == m.triangle_count());
  for (int v = 0; v < m.vertex_count(); ++v) CHECK(back.vertices[v] == m.vertices[v]);
  CHECK(back.triangles == m.triangles);

  write_obj(dir / "m.obj", m);
  SurfaceMesh objback = read_obj(dir / "m.obj");
  REQUIRE(objback.vertex_count() == m.vertex_count());
  for (int v = 0; v < m.vertex_count(); ++v) CHECK(objback.vertices[v] == m.vertices[v]);
  CHECK(objback.triangles == m.triangles);

  // Deterministic bytes: writing twice gives identical files.
  write_off(dir / "m2.off", m);
  std::ifstream a(dir / "m.off", std::ios::binary), b(dir / "m2.off", std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), {});
  std::string sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);

  std::map<std::string, std::string> meta{{"kind", "catenoid"}, {"level", "0"}};
  write_sidecar(dir / "m.meta", meta);
  CHECK(read_sidecar(dir / "m.meta") == meta);
}

TEST_CASE("mesh io: malformed files are rejected") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "fbms_io_test";
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "bad1.off");
    os << "NOT_AN_OFF\n1 0 0\n0 0 0\n";
  }
  CHECK_THROWS(read_off(dir / "bad1.off"));
  {
    std::ofstream os(dir / "bad2.off");
    os << "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n";  // face index out of range
  }
  CHECK_THROWS(read_off(dir / "bad2.off"));
  {
    std::ofstream os(dir / "bad3.off");
    os << "OFF\n3 1 0\n0 0 0\n1 0 0\n";  // truncated
  }
  CHECK_THROWS(read_off(dir / "bad3.off"));
}

TEST_CASE("matrix market export") {
  namespace fs = std::filesystem;
  Eigen::SparseMatrix<double> A(3, 3);
  std::vector<Eigen::Triplet<double>> ts{{0, 0, 2.0}, {1, 0, -1.0}, {0, 1, -1.0}, {1, 1, 2.0}, {2, 2, 1.5}};
  A.setFromTriplets(ts.begin(), ts.end());
  fs::path dir = fs::temp_directory_path() / "fbms_io_test";
  fs::create_directories(dir);
  write_matrix_market(dir / "a.mtx", A);
  std::ifstream is(dir / "a.mtx");
  std::string header, counts;
  std::getline(is, header);
  std::getline(is, counts);
  CHECK(header == "%%MatrixMarket matrix coordinate real symmetric");
  CHECK(counts == "3 3 4");  // lower triangle: (1,1),(2,1),(2,2),(3,3)
}
