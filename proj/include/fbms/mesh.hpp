#pragma once

// Oriented triangle surface meshes with boundary: edge tables, validation,
// topology counts, and 1->4 midpoint refinement with optional reprojection.

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace fbms {

using Vec3 = Eigen::Vector3d;

struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
};

// Edges are stored canonically as (a,b) with a < b, sorted lexicographically
// so that edge indices are reproducible across runs.
struct EdgeTable {
  std::vector<std::array<int, 2>> edges;      // canonical endpoints, a < b
  std::vector<std::array<int, 2>> edge_tris;  // adjacent triangles, -1 if none
  std::vector<std::array<int, 3>> tri_edges;  // edge index opposite-free: local slot i is (v_i, v_{i+1})
  std::vector<std::array<int, 3>> tri_signs;  // +1 if local traversal matches canonical direction
  std::vector<bool> edge_on_boundary;
  std::vector<bool> vertex_on_boundary;

  int edge_count() const { return static_cast<int>(edges.size()); }
  int boundary_edge_count() const {
    return static_cast<int>(std::count(edge_on_boundary.begin(), edge_on_boundary.end(), true));
  }
};

namespace detail {
inline std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}
}  // namespace detail

inline EdgeTable build_edge_table(const SurfaceMesh& mesh) {
  std::vector<std::array<int, 2>> raw;
  raw.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles) {
    for (int i = 0; i < 3; ++i) {
      int a = t[i], b = t[(i + 1) % 3];
      if (a == b) throw std::runtime_error("build_edge_table: degenerate triangle with repeated vertex");
      raw.push_back({std::min(a, b), std::max(a, b)});
    }
  }
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());

  EdgeTable et;
  et.edges = std::move(raw);
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(et.edges.size() * 2);
  for (int e = 0; e < et.edge_count(); ++e)
    index[detail::edge_key(et.edges[e][0], et.edges[e][1])] = e;

  et.edge_tris.assign(et.edges.size(), {-1, -1});
  et.tri_edges.resize(mesh.triangles.size());
  et.tri_signs.resize(mesh.triangles.size());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      int a = tri[i], b = tri[(i + 1) % 3];
      int e = index.at(detail::edge_key(std::min(a, b), std::max(a, b)));
      et.tri_edges[t][i] = e;
      et.tri_signs[t][i] = (a < b) ? 1 : -1;
      if (et.edge_tris[e][0] < 0)
        et.edge_tris[e][0] = t;
      else if (et.edge_tris[e][1] < 0)
        et.edge_tris[e][1] = t;
      else
        throw std::runtime_error("build_edge_table: edge " + std::to_string(e) +
                                 " shared by more than two triangles");
    }
  }

  et.edge_on_boundary.assign(et.edges.size(), false);
  et.vertex_on_boundary.assign(mesh.vertices.size(), false);
  for (int e = 0; e < et.edge_count(); ++e) {
    if (et.edge_tris[e][1] < 0) {
      et.edge_on_boundary[e] = true;
      et.vertex_on_boundary[et.edges[e][0]] = true;
      et.vertex_on_boundary[et.edges[e][1]] = true;
    }
  }
  return et;
}

struct MeshDiagnostics {
  bool edge_manifold = true;
  bool orientation_consistent = true;
  bool boundary_simple = true;              // every boundary vertex has exactly two boundary edges
  int connected_components = 0;
  int duplicate_vertex_pairs = 0;           // pairs closer than 1e-12
  std::vector<int> degenerate_triangles;    // area <= 1e-14
  std::vector<int> nonmanifold_edges;
  std::vector<int> conflicting_edges;       // directed edge repeated => incompatible orientation

  bool ok() const {
    return edge_manifold && orientation_consistent && boundary_simple &&
           duplicate_vertex_pairs == 0 && degenerate_triangles.empty();
  }
};

inline double triangle_area(const SurfaceMesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  return 0.5 * (mesh.vertices[tri[1]] - mesh.vertices[tri[0]])
                   .cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]])
                   .norm();
}

inline MeshDiagnostics validate_mesh(const SurfaceMesh& mesh) {
  MeshDiagnostics d;

  // Edge usage and orientation: each undirected edge carries at most two
  // triangles, and interior edges must be traversed once in each direction.
  std::unordered_map<std::uint64_t, int> undirected, directed;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      int a = tri[i], b = tri[(i + 1) % 3];
      ++undirected[detail::edge_key(std::min(a, b), std::max(a, b))];
      ++directed[detail::edge_key(a, b)];
    }
  }
  int edge_id = 0;
  std::vector<std::pair<std::uint64_t, int>> und(undirected.begin(), undirected.end());
  std::sort(und.begin(), und.end());
  for (const auto& [key, uses] : und) {
    if (uses > 2) {
      d.edge_manifold = false;
      d.nonmanifold_edges.push_back(edge_id);
    }
    ++edge_id;
  }
  edge_id = 0;
  std::vector<std::pair<std::uint64_t, int>> dir(directed.begin(), directed.end());
  std::sort(dir.begin(), dir.end());
  for (const auto& [key, uses] : dir) {
    if (uses > 1) {
      d.orientation_consistent = false;
      d.conflicting_edges.push_back(edge_id);
    }
    ++edge_id;
  }

  // Boundary simplicity: boundary edge degree per vertex must be 0 or 2,
  // otherwise loops pinch together at a vertex.
  std::vector<int> bdeg(mesh.vertices.size(), 0);
  for (const auto& [key, uses] : und) {
    if (uses == 1) {
      ++bdeg[static_cast<int>(key >> 32)];
      ++bdeg[static_cast<int>(key & 0xffffffffu)];
    }
  }
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (bdeg[v] != 0 && bdeg[v] != 2) d.boundary_simple = false;

  for (int t = 0; t < mesh.triangle_count(); ++t)
    if (triangle_area(mesh, t) <= 1e-14) d.degenerate_triangles.push_back(t);

  // Duplicate vertices within 1e-12, via a uniform hash grid.
  {
    const double cell = 1e-12;
    std::unordered_map<std::uint64_t, std::vector<int>> grid;
    auto cell_key = [cell](const Vec3& p) {
      auto q = [cell](double x) {
        return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(x / cell)) & 0x1fffff);
      };
      return (q(p.x()) << 42) | (q(p.y()) << 21) | q(p.z());
    };
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const Vec3& p = mesh.vertices[v];
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dz = -1; dz <= 1; ++dz) {
            Vec3 probe = p + cell * Vec3(dx, dy, dz);
            auto it = grid.find(cell_key(probe));
            if (it == grid.end()) continue;
            for (int w : it->second)
              if ((mesh.vertices[w] - p).norm() < 1e-12) ++d.duplicate_vertex_pairs;
          }
      grid[cell_key(p)].push_back(v);
    }
  }

  // Connected components over vertex adjacency.
  std::vector<int> comp(mesh.vertices.size(), -1);
  std::vector<std::vector<int>> adj(mesh.vertices.size());
  for (const auto& tri : mesh.triangles)
    for (int i = 0; i < 3; ++i) {
      adj[tri[i]].push_back(tri[(i + 1) % 3]);
      adj[tri[(i + 1) % 3]].push_back(tri[i]);
    }
  int ncomp = 0;
  std::vector<int> stack;
  for (int s = 0; s < mesh.vertex_count(); ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = ncomp;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : adj[v])
        if (comp[w] < 0) {
          comp[w] = ncomp;
          stack.push_back(w);
        }
    }
    ++ncomp;
  }
  d.connected_components = ncomp;
  return d;
}

// Boundary loops as cyclic vertex sequences, ordered so the surface lies on
// the left of the traversal (i.e. following the orientation induced by the
// adjacent triangles). Loops are sorted by their smallest vertex index.
inline std::vector<std::vector<int>> boundary_loops(const SurfaceMesh& mesh, const EdgeTable& et) {
  // Directed boundary edges: (u -> v) as traversed by the unique adjacent triangle.
  std::unordered_map<int, int> next;  // u -> v
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      int e = et.tri_edges[t][i];
      if (!et.edge_on_boundary[e]) continue;
      int u = tri[i], v = tri[(i + 1) % 3];
      if (next.count(u))
        throw std::runtime_error("boundary_loops: boundary is not a disjoint union of simple loops");
      next[u] = v;
    }
  }
  std::vector<std::vector<int>> loops;
  std::vector<bool> seen(mesh.vertices.size(), false);
  std::vector<int> starts;
  for (const auto& [u, v] : next) starts.push_back(u);
  std::sort(starts.begin(), starts.end());
  for (int s : starts) {
    if (seen[s]) continue;
    std::vector<int> loop;
    int v = s;
    do {
      loop.push_back(v);
      seen[v] = true;
      auto it = next.find(v);
      if (it == next.end())
        throw std::runtime_error("boundary_loops: open boundary chain at vertex " + std::to_string(v));
      v = it->second;
    } while (v != s);
    loops.push_back(std::move(loop));
  }
  return loops;
}

struct MeshTopology {
  int vertices = 0, edges = 0, faces = 0;
  int euler = 0;
  int boundary_components = 0;
  int genus = 0;
  std::vector<std::vector<int>> loops;
};

inline MeshTopology build_topology(const SurfaceMesh& mesh, const EdgeTable& et) {
  MeshTopology topo;
  topo.vertices = mesh.vertex_count();
  topo.edges = et.edge_count();
  topo.faces = mesh.triangle_count();
  topo.euler = topo.vertices - topo.edges + topo.faces;
  topo.loops = boundary_loops(mesh, et);
  topo.boundary_components = static_cast<int>(topo.loops.size());
  const int twice_genus = 2 - topo.boundary_components - topo.euler;
  if (twice_genus < 0 || twice_genus % 2 != 0)
    throw std::runtime_error("build_topology: Euler characteristic " + std::to_string(topo.euler) +
                             " with " + std::to_string(topo.boundary_components) +
                             " boundary components does not match an orientable surface");
  topo.genus = twice_genus / 2;
  return topo;
}

// Reprojection hooks for refinement of analytic surfaces. Either function may
// throw to signal non-convergence; refine() rethrows with vertex context.
struct SurfaceProjector {
  std::function<Vec3(const Vec3&)> to_surface;   // applied to interior edge midpoints
  std::function<Vec3(const Vec3&)> to_boundary;  // applied to boundary edge midpoints
};

inline SurfaceMesh refine(const SurfaceMesh& mesh, const SurfaceProjector* projector = nullptr) {
  EdgeTable et = build_edge_table(mesh);
  SurfaceMesh out;
  out.vertices = mesh.vertices;
  out.vertices.reserve(mesh.vertices.size() + et.edges.size());
  std::vector<int> midpoint(et.edges.size());
  for (int e = 0; e < et.edge_count(); ++e) {
    Vec3 m = 0.5 * (mesh.vertices[et.edges[e][0]] + mesh.vertices[et.edges[e][1]]);
    if (projector) {
      try {
        if (et.edge_on_boundary[e] && projector->to_boundary)
          m = projector->to_boundary(m);
        else if (!et.edge_on_boundary[e] && projector->to_surface)
          m = projector->to_surface(m);
      } catch (const std::exception& ex) {
        throw std::runtime_error("refine: projector failed at midpoint of edge " + std::to_string(e) +
                                 " near (" + std::to_string(m.x()) + ", " + std::to_string(m.y()) +
                                 ", " + std::to_string(m.z()) + "): " + ex.what());
      }
    }
    midpoint[e] = static_cast<int>(out.vertices.size());
    out.vertices.push_back(m);
  }
  out.triangles.reserve(mesh.triangles.size() * 4);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    int m01 = midpoint[et.tri_edges[t][0]];
    int m12 = midpoint[et.tri_edges[t][1]];
    int m20 = midpoint[et.tri_edges[t][2]];
    out.triangles.push_back({tri[0], m01, m20});
    out.triangles.push_back({tri[1], m12, m01});
    out.triangles.push_back({tri[2], m20, m12});
    out.triangles.push_back({m01, m12, m20});
  }
  return out;
}

inline double mean_edge_length(const SurfaceMesh& mesh, const EdgeTable& et) {
  double total = 0;
  for (const auto& e : et.edges) total += (mesh.vertices[e[1]] - mesh.vertices[e[0]]).norm();
  return et.edges.empty() ? 0.0 : total / static_cast<double>(et.edges.size());
}

inline double total_area(const SurfaceMesh& mesh) {
  double a = 0;
  for (int t = 0; t < mesh.triangle_count(); ++t) a += triangle_area(mesh, t);
  return a;
}

}  // namespace fbms
