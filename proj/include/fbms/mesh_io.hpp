#pragma once

// Mesh and matrix serialization: OFF / OBJ round-trip at full double
// precision, key=value sidecars, MatrixMarket export, CSV helpers.
// Writers are atomic (temp file + rename) and emit no timestamps so that
// identical inputs produce byte-identical files.

#include "fbms/mesh.hpp"

#include <Eigen/SparseCore>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

namespace fbms {

namespace detail {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os << content;
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

inline void write_off(const std::filesystem::path& path, const SurfaceMesh& mesh) {
  std::ostringstream os;
  os << "OFF\n" << mesh.vertex_count() << ' ' << mesh.triangle_count() << " 0\n";
  for (const auto& p : mesh.vertices)
    os << detail::format_double(p.x()) << ' ' << detail::format_double(p.y()) << ' '
       << detail::format_double(p.z()) << '\n';
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  detail::atomic_write(path, os.str());
}

inline SurfaceMesh read_off(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  auto next_token_line = [&is, &path]() {
    std::string line;
    while (std::getline(is, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return line;
    }
    throw std::runtime_error("unexpected end of file in " + path.string());
  };
  std::string header = next_token_line();
  std::istringstream hs(header);
  std::string tag;
  hs >> tag;
  if (tag != "OFF")
    throw std::runtime_error(path.string() + ": missing OFF header");
  std::istringstream counts(next_token_line());
  int nv = 0, nf = 0, ne = 0;
  counts >> nv >> nf >> ne;
  if (nv <= 0 || nf < 0) throw std::runtime_error(path.string() + ": bad OFF counts");
  SurfaceMesh mesh;
  mesh.vertices.resize(nv);
  for (int v = 0; v < nv; ++v) {
    std::istringstream ls(next_token_line());
    if (!(ls >> mesh.vertices[v].x() >> mesh.vertices[v].y() >> mesh.vertices[v].z()))
      throw std::runtime_error(path.string() + ": bad vertex line " + std::to_string(v));
  }
  mesh.triangles.resize(nf);
  for (int f = 0; f < nf; ++f) {
    std::istringstream ls(next_token_line());
    int arity = 0;
    if (!(ls >> arity) || arity != 3)
      throw std::runtime_error(path.string() + ": face " + std::to_string(f) + " is not a triangle");
    ls >> mesh.triangles[f][0] >> mesh.triangles[f][1] >> mesh.triangles[f][2];
    for (int i = 0; i < 3; ++i)
      if (mesh.triangles[f][i] < 0 || mesh.triangles[f][i] >= nv)
        throw std::runtime_error(path.string() + ": face " + std::to_string(f) + " index out of range");
  }
  return mesh;
}

inline void write_obj(const std::filesystem::path& path, const SurfaceMesh& mesh) {
  std::ostringstream os;
  for (const auto& p : mesh.vertices)
    os << "v " << detail::format_double(p.x()) << ' ' << detail::format_double(p.y()) << ' '
       << detail::format_double(p.z()) << '\n';
  for (const auto& t : mesh.triangles)
    os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  detail::atomic_write(path, os.str());
}

inline SurfaceMesh read_obj(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  SurfaceMesh mesh;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      ls >> p.x() >> p.y() >> p.z();
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::array<int, 3> tri{};
      for (int i = 0; i < 3; ++i) {
        std::string tok;
        ls >> tok;
        tri[i] = std::stoi(tok.substr(0, tok.find('/'))) - 1;  // indices may carry /vt/vn
      }
      mesh.triangles.push_back(tri);
    }
  }
  if (mesh.vertices.empty()) throw std::runtime_error(path.string() + ": no vertices");
  return mesh;
}

// Sidecar metadata: sorted "key = value" lines.
inline void write_sidecar(const std::filesystem::path& path,
                          const std::map<std::string, std::string>& entries) {
  std::ostringstream os;
  for (const auto& [k, v] : entries) os << k << " = " << v << '\n';
  detail::atomic_write(path, os.str());
}

inline std::map<std::string, std::string> read_sidecar(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

inline void write_matrix_market(const std::filesystem::path& path,
                                const Eigen::SparseMatrix<double>& A, bool symmetric = true) {
  std::ostringstream os;
  os << "%%MatrixMarket matrix coordinate real " << (symmetric ? "symmetric" : "general") << '\n';
  std::vector<std::array<std::int64_t, 2>> coords;
  std::vector<double> vals;
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      if (symmetric && it.row() < it.col()) continue;  // keep lower triangle
      coords.push_back({it.row() + 1, it.col() + 1});
      vals.push_back(it.value());
    }
  os << A.rows() << ' ' << A.cols() << ' ' << coords.size() << '\n';
  for (size_t i = 0; i < coords.size(); ++i)
    os << coords[i][0] << ' ' << coords[i][1] << ' ' << detail::format_double(vals[i]) << '\n';
  detail::atomic_write(path, os.str());
}

// CSV writer: caller supplies a header row and string cells; doubles should be
// formatted with format_double for determinism.
inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  for (size_t i = 0; i < header.size(); ++i) os << header[i] << (i + 1 < header.size() ? "," : "");
  os << '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) os << row[i] << (i + 1 < row.size() ? "," : "");
    os << '\n';
  }
  detail::atomic_write(path, os.str());
}

}  // namespace fbms
