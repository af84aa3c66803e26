#pragma once

// Surface catalogue: the equatorial disk and the critical catenoid with full
// analytic data (frames, shape operator, |A|^2), plus synthetic genus-g,
// k-boundary meshes used for topology and index-bound experiments.

#include "fbms/mesh.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>

namespace fbms {

// The critical catenoid X(t,th) = c (cosh t cos th, cosh t sin th, t) meets
// the unit sphere orthogonally when t0 tanh t0 = 1 and c = 1/sqrt(cosh^2 t0 + t0^2).
inline double catenoid_t0() {
  // Solve t tanh t = 1 by bisection; the root is simple and lies in (1, 1.3).
  double lo = 1.0, hi = 1.3;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (mid * std::tanh(mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double catenoid_scale() {
  double t0 = catenoid_t0();
  return 1.0 / std::sqrt(std::cosh(t0) * std::cosh(t0) + t0 * t0);
}

enum class SurfaceKind { Disk, Catenoid, Synthetic };

inline std::string to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::Disk: return "disk";
    case SurfaceKind::Catenoid: return "catenoid";
    case SurfaceKind::Synthetic: return "synthetic";
  }
  return "?";
}

inline SurfaceKind surface_kind_from_string(const std::string& s) {
  if (s == "disk") return SurfaceKind::Disk;
  if (s == "catenoid") return SurfaceKind::Catenoid;
  if (s == "synthetic") return SurfaceKind::Synthetic;
  throw std::runtime_error("unknown surface kind: " + s);
}

// Closed-form fields for the two free boundary minimal surfaces. All queries
// are point-based: a mesh vertex that lies on (or near) the surface is mapped
// back to chart coordinates, so the same code serves every refinement level.
struct AnalyticSurface {
  SurfaceKind kind = SurfaceKind::Disk;
  double t0 = 0, c = 0;  // catenoid parameters, unused for the disk

  static AnalyticSurface disk() { return {SurfaceKind::Disk, 0, 0}; }
  static AnalyticSurface catenoid() {
    AnalyticSurface s;
    s.kind = SurfaceKind::Catenoid;
    s.t0 = catenoid_t0();
    s.c = catenoid_scale();
    return s;
  }

  Vec3 position(double a, double b) const {  // disk: (r, th); catenoid: (t, th)
    if (kind == SurfaceKind::Disk) return {a * std::cos(b), a * std::sin(b), 0.0};
    return {c * std::cosh(a) * std::cos(b), c * std::cosh(a) * std::sin(b), c * a};
  }

  Vec3 unit_normal(const Vec3& p) const {
    if (kind == SurfaceKind::Disk) return {0, 0, 1};
    double t = p.z() / c, th = std::atan2(p.y(), p.x());
    double ch = std::cosh(t);
    return Vec3(-std::cos(th), -std::sin(th), std::sinh(t)) / ch;
  }

  // Orthonormal tangent frame (e1, e2) with e1 x e2 = N.
  std::pair<Vec3, Vec3> tangent_frame(const Vec3& p) const {
    if (kind == SurfaceKind::Disk) return {Vec3(1, 0, 0), Vec3(0, 1, 0)};
    double t = p.z() / c, th = std::atan2(p.y(), p.x());
    double ch = std::cosh(t), sh = std::sinh(t);
    Vec3 et(sh * std::cos(th) / ch, sh * std::sin(th) / ch, 1.0 / ch);
    Vec3 eth(-std::sin(th), std::cos(th), 0);
    return {et, eth};
  }

  // Shape operator in the (e1, e2) frame; the catenoid has principal
  // curvatures -+ 1/(c cosh^2 t) along (e_t, e_th).
  Eigen::Matrix2d shape(const Vec3& p) const {
    if (kind == SurfaceKind::Disk) return Eigen::Matrix2d::Zero();
    double t = p.z() / c;
    double kappa = 1.0 / (c * std::cosh(t) * std::cosh(t));
    Eigen::Matrix2d S;
    S << -kappa, 0, 0, kappa;
    return S;
  }

  double norm_A_squared(const Vec3& p) const {
    if (kind == SurfaceKind::Disk) return 0.0;
    double t = p.z() / c;
    double ch2 = std::cosh(t) * std::cosh(t);
    return 2.0 / (c * c * ch2 * ch2);
  }

  double max_norm_A_squared() const {
    return kind == SurfaceKind::Disk ? 0.0 : 2.0 / (c * c);
  }

  // Nearest-point projection used after midpoint refinement. Input points are
  // O(h^2) off the surface, so a Newton iteration from the chart estimate
  // converges in a handful of steps; failure to converge throws.
  Vec3 project_to_surface(const Vec3& p) const {
    if (kind == SurfaceKind::Disk) return {p.x(), p.y(), 0.0};
    double th = std::atan2(p.y(), p.x());
    double rho = std::hypot(p.x(), p.y());
    double t = p.z() / c;
    // Minimize (c cosh t - rho)^2 + (c t - z)^2 over t.
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
      double ch = std::cosh(t), sh = std::sinh(t);
      double g = c * sh * (c * ch - rho) + c * (c * t - p.z());
      double H = c * c * (sh * sh + ch * ch) - rho * c * ch + c * c;
      double step = (std::abs(H) > 1e-300) ? g / H : g;
      t -= step;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(t))) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw std::runtime_error("catenoid projection did not converge");
    t = std::clamp(t, -t0, t0);
    return position(t, th);
  }

  Vec3 project_to_boundary(const Vec3& p) const {
    if (kind == SurfaceKind::Disk) {
      double r = std::hypot(p.x(), p.y());
      if (r < 1e-300) throw std::runtime_error("disk boundary projection at origin");
      return {p.x() / r, p.y() / r, 0.0};
    }
    double th = std::atan2(p.y(), p.x());
    return position(p.z() >= 0 ? t0 : -t0, th);
  }

  SurfaceProjector projector() const {
    SurfaceProjector proj;
    proj.to_surface = [*this](const Vec3& p) { return project_to_surface(p); };
    proj.to_boundary = [*this](const Vec3& p) { return project_to_boundary(p); };
    return proj;
  }
};

// ---------------------------------------------------------------------------
// Mesh generators
// ---------------------------------------------------------------------------

// Equatorial unit disk: nr concentric rings, uniform angular resolution.
inline SurfaceMesh make_disk_mesh(int nr, int ntheta) {
  if (nr < 2 || ntheta < 4) throw std::runtime_error("make_disk_mesh: resolution too low");
  SurfaceMesh mesh;
  mesh.vertices.push_back(Vec3::Zero());
  for (int i = 1; i <= nr; ++i) {
    double r = static_cast<double>(i) / nr;
    for (int j = 0; j < ntheta; ++j) {
      double th = 2.0 * std::numbers::pi * j / ntheta;
      mesh.vertices.emplace_back(r * std::cos(th), r * std::sin(th), 0.0);
    }
  }
  auto ring = [ntheta](int i, int j) { return 1 + (i - 1) * ntheta + (j % ntheta); };
  for (int j = 0; j < ntheta; ++j) mesh.triangles.push_back({0, ring(1, j), ring(1, j + 1)});
  for (int i = 1; i < nr; ++i)
    for (int j = 0; j < ntheta; ++j) {
      mesh.triangles.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      mesh.triangles.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  return mesh;
}

// Critical catenoid: structured (t, theta) grid over [-t0, t0] x [0, 2pi).
// The conformal factor is even in t, so a uniform grid keeps triangles well
// shaped; ntheta is chosen so dtheta is close to dt when not specified.
inline SurfaceMesh make_catenoid_mesh(int nt, int ntheta = 0) {
  if (nt < 4) throw std::runtime_error("make_catenoid_mesh: resolution too low");
  AnalyticSurface cat = AnalyticSurface::catenoid();
  if (ntheta == 0) {
    ntheta = static_cast<int>(std::round(std::numbers::pi * nt / cat.t0 / 2.0)) * 2;
    ntheta = std::max(ntheta, 8);
  }
  SurfaceMesh mesh;
  for (int i = 0; i <= nt; ++i) {
    double t = -cat.t0 + 2.0 * cat.t0 * i / nt;
    for (int j = 0; j < ntheta; ++j) {
      double th = 2.0 * std::numbers::pi * j / ntheta;
      mesh.vertices.push_back(cat.position(t, th));
    }
  }
  auto at = [ntheta](int i, int j) { return i * ntheta + (j % ntheta); };
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < ntheta; ++j) {
      mesh.triangles.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      mesh.triangles.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  return mesh;
}

namespace detail {

// Voxel-slab surface: the boundary of a one-cell-thick solid slab with
// full-depth drill holes (each adds a handle) and single-face windows
// (each opens a boundary loop). Holes and windows are kept two cells apart
// so the result is a clean oriented manifold.
inline SurfaceMesh make_voxel_surface(int genus, int boundaries) {
  const int nx = 3 * genus + 2 * boundaries + 1;
  const int ny = 3;
  std::set<std::pair<int, int>> drilled, windows;
  for (int i = 0; i < genus; ++i) drilled.insert({3 * i + 1, 1});
  for (int m = 0; m < boundaries; ++m) windows.insert({3 * genus + 2 * m + 1, 1});

  auto solid = [&](int x, int y, int z) {
    if (x < 0 || x >= nx || y < 0 || y >= ny || z != 0) return false;
    return !drilled.count({x, y});
  };

  const double s = 1.0 / nx;  // scale to O(1) extent
  std::map<std::array<int, 3>, int> vid;
  SurfaceMesh mesh;
  auto vertex = [&](int x, int y, int z) {
    auto it = vid.find({x, y, z});
    if (it != vid.end()) return it->second;
    int id = mesh.vertex_count();
    vid[{x, y, z}] = id;
    mesh.vertices.emplace_back(s * x, s * y, s * z);
    return id;
  };
  // Emit two triangles per exposed face, oriented so normals point out of the solid.
  auto quad = [&](std::array<int, 3> a, std::array<int, 3> b, std::array<int, 3> c,
                  std::array<int, 3> d) {
    int va = vertex(a[0], a[1], a[2]), vb = vertex(b[0], b[1], b[2]);
    int vc = vertex(c[0], c[1], c[2]), vd = vertex(d[0], d[1], d[2]);
    mesh.triangles.push_back({va, vb, vc});
    mesh.triangles.push_back({va, vc, vd});
  };
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y) {
      if (!solid(x, y, 0)) continue;
      if (!solid(x, y, 1) && !windows.count({x, y}))  // +z (top), unless it is a window
        quad({x, y, 1}, {x + 1, y, 1}, {x + 1, y + 1, 1}, {x, y + 1, 1});
      if (!solid(x, y, -1))  // -z (bottom)
        quad({x, y, 0}, {x, y + 1, 0}, {x + 1, y + 1, 0}, {x + 1, y, 0});
      if (!solid(x - 1, y, 0))  // -x
        quad({x, y, 0}, {x, y, 1}, {x, y + 1, 1}, {x, y + 1, 0});
      if (!solid(x + 1, y, 0))  // +x
        quad({x + 1, y, 0}, {x + 1, y + 1, 0}, {x + 1, y + 1, 1}, {x + 1, y, 1});
      if (!solid(x, y - 1, 0))  // -y
        quad({x, y, 0}, {x + 1, y, 0}, {x + 1, y, 1}, {x, y, 1});
      if (!solid(x, y + 1, 0))  // +y
        quad({x, y + 1, 0}, {x, y + 1, 1}, {x + 1, y + 1, 1}, {x + 1, y + 1, 0});
    }
  return mesh;
}

// Smooth genus-1 alternative: torus of revolution minus a rectangular patch
// of cells, used where a quasi-uniform smooth mesh matters more than general
// (g, k) coverage.
inline SurfaceMesh make_torus_with_hole(int res) {
  const int nu = 4 * res, nv = 3 * res;
  const double R = 1.0, r = 0.45;
  const int hw = std::max(1, res / 2);
  SurfaceMesh mesh;
  std::vector<int> id(static_cast<size_t>(nu) * nv, -1);
  auto pos = [&](int i, int j) {
    double u = 2.0 * std::numbers::pi * i / nu, v = 2.0 * std::numbers::pi * j / nv;
    return Vec3((R + r * std::cos(v)) * std::cos(u), (R + r * std::cos(v)) * std::sin(u),
                r * std::sin(v));
  };
  auto vertex = [&](int i, int j) {
    i = (i % nu + nu) % nu;
    j = (j % nv + nv) % nv;
    int& slot = id[static_cast<size_t>(i) * nv + j];
    if (slot < 0) {
      slot = mesh.vertex_count();
      mesh.vertices.push_back(pos(i, j));
    }
    return slot;
  };
  auto removed = [&](int i, int j) { return i >= 2 && i < 2 + hw && j >= 2 && j < 2 + hw; };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      if (removed(i, j)) continue;
      int a = vertex(i, j), b = vertex(i + 1, j), c = vertex(i + 1, j + 1), d = vertex(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  return mesh;
}

}  // namespace detail

// Synthetic (genus g, k boundary components) mesh. These carry no minimal
// geometry; they exist to exercise topology-dependent code paths.
inline SurfaceMesh make_synthetic_mesh(int genus, int boundaries, int subdivisions = 0) {
  if (genus < 0 || boundaries < 1)
    throw std::runtime_error("make_synthetic_mesh: need genus >= 0 and k >= 1");
  SurfaceMesh mesh = detail::make_voxel_surface(genus, boundaries);
  for (int i = 0; i < subdivisions; ++i) mesh = refine(mesh);
  // Construction self-check: the intended topology must come out exactly.
  MeshTopology topo = build_topology(mesh, build_edge_table(mesh));
  if (topo.genus != genus || topo.boundary_components != boundaries)
    throw std::runtime_error("make_synthetic_mesh: produced (g,k) = (" + std::to_string(topo.genus) +
                             "," + std::to_string(topo.boundary_components) + "), wanted (" +
                             std::to_string(genus) + "," + std::to_string(boundaries) + ")");
  return mesh;
}

inline SurfaceMesh make_torus_with_hole_mesh(int res) {
  SurfaceMesh mesh = detail::make_torus_with_hole(std::max(res, 4));
  MeshTopology topo = build_topology(mesh, build_edge_table(mesh));
  if (topo.genus != 1 || topo.boundary_components != 1)
    throw std::runtime_error("make_torus_with_hole_mesh: unexpected topology");
  return mesh;
}

// Closed torus of revolution (genus 1, no boundary); handy as a topology
// oracle for code that must also work on closed surfaces.
inline SurfaceMesh make_torus_mesh(int res) {
  const int nu = 4 * std::max(res, 3), nv = 3 * std::max(res, 3);
  const double R = 1.0, r = 0.45;
  SurfaceMesh mesh;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      double u = 2.0 * std::numbers::pi * i / nu, v = 2.0 * std::numbers::pi * j / nv;
      mesh.vertices.emplace_back((R + r * std::cos(v)) * std::cos(u),
                                 (R + r * std::cos(v)) * std::sin(u), r * std::sin(v));
    }
  auto at = [nu, nv](int i, int j) { return (i % nu) * nv + (j % nv); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      mesh.triangles.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      mesh.triangles.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  return mesh;
}

// ---------------------------------------------------------------------------
// SurfaceDesc: a reproducible recipe (kind + resolution + optional topology),
// expanded into a refinement ladder by make_surface.
// ---------------------------------------------------------------------------

struct SurfaceDesc {
  SurfaceKind kind = SurfaceKind::Disk;
  int resolution = 6;  // rings (disk), t-rows (catenoid), grid multiplier (synthetic)
  int genus = 0;
  int boundaries = 1;

  std::string name() const {
    if (kind == SurfaceKind::Synthetic)
      return "synthetic_g" + std::to_string(genus) + "k" + std::to_string(boundaries);
    return to_string(kind);
  }
};

struct SurfaceBundle {
  SurfaceDesc desc;
  int level = 0;
  SurfaceMesh mesh;
  EdgeTable edges;
  MeshTopology topology;
  std::optional<AnalyticSurface> analytic;
};

inline SurfaceBundle make_surface(const SurfaceDesc& desc, int level) {
  if (level < 0) throw std::runtime_error("make_surface: negative level");
  SurfaceBundle bundle;
  bundle.desc = desc;
  bundle.level = level;
  switch (desc.kind) {
    case SurfaceKind::Disk: {
      if (desc.resolution < 4) throw std::runtime_error("make_surface: disk resolution must be >= 4");
      bundle.analytic = AnalyticSurface::disk();
      int ntheta = 2 * static_cast<int>(std::round(std::numbers::pi * desc.resolution));
      bundle.mesh = make_disk_mesh(desc.resolution, ntheta);
      break;
    }
    case SurfaceKind::Catenoid: {
      if (desc.resolution < 4)
        throw std::runtime_error("make_surface: catenoid resolution must be >= 4");
      bundle.analytic = AnalyticSurface::catenoid();
      bundle.mesh = make_catenoid_mesh(desc.resolution);
      break;
    }
    case SurfaceKind::Synthetic: {
      if (desc.genus == 1 && desc.boundaries == 1 && desc.resolution >= 4)
        bundle.mesh = make_torus_with_hole_mesh(desc.resolution);
      else
        bundle.mesh = make_synthetic_mesh(desc.genus, desc.boundaries);
      break;
    }
  }
  if (bundle.analytic) {
    SurfaceProjector proj = bundle.analytic->projector();
    for (int l = 0; l < level; ++l) bundle.mesh = refine(bundle.mesh, &proj);
  } else {
    for (int l = 0; l < level; ++l) bundle.mesh = refine(bundle.mesh);
  }
  bundle.edges = build_edge_table(bundle.mesh);
  bundle.topology = build_topology(bundle.mesh, bundle.edges);
  return bundle;
}

}  // namespace fbms
