// Jacobi spectrum of the equatorial disk across a refinement ladder. The
// bottom eigenvalue converges to -kappa*^2 where kappa* solves
// kappa I_1(kappa) = I_0(kappa); the next two discretize the rotation fields
// and sink into the kernel band.

#include "fbms/jacobi.hpp"

#include <cstdio>

int main() {
  using namespace fbms;
  SurfaceDesc desc{SurfaceKind::Disk, 6, 0, 1};
  std::printf("level   vertices   lambda_1      lambda_2      lambda_3      index  nullity\n");
  for (int level = 0; level <= 3; ++level) {
    SurfaceBundle b = make_surface(desc, level);
    JacobiProblem p = assemble_jacobi(b, shape_field(b));
    EigenOptions opts;
    opts.want_vectors = false;
    SpectralResult r = eigen_jacobi(p, 6, opts);
    MorseIndex mi = morse_index(p);
    std::printf("%-7d %-10d %-13.8f %-13.3e %-13.3e %-6d %d\n", level, b.mesh.vertex_count(),
                r.values[0], r.values[1], r.values[2], mi.index, mi.nullity);
  }
  return 0;
}
