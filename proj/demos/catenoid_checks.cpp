// Identity checks on the critical catenoid: every pointwise and boundary
// identity as a residual ladder over three refinement levels, followed by the
// eigenvalue comparison and the index bound.

#include "fbms/verify.hpp"

#include <cstdio>

int main() {
  using namespace fbms;
  SurfaceDesc desc{SurfaceKind::Catenoid, 6, 0, 2};

  for (CheckId id : {CheckId::PPC_A, CheckId::PPC_B, CheckId::LAPIP, CheckId::JC, CheckId::PC1,
                     CheckId::BC, CheckId::ROS}) {
    for (const CheckReport& r : run_identity_ladder(id, desc, {0, 1, 2}))
      std::printf("%-6s L%d  max %-10.5f l2 %-10.5f rate %-6.2f %s\n", r.check_id.c_str(),
                  r.level, r.residual_max, r.residual_l2, r.rate, r.pass ? "pass" : "fail");
  }

  CheckReport ic = check_ic(product_gauss_sphere());
  std::printf("%-6s     max %-10.3e                          %s\n", ic.check_id.c_str(),
              ic.residual_max, ic.pass ? "pass" : "fail");

  SurfaceBundle b = make_surface(desc, 2);
  ComparisonTable table = eigenvalue_comparison_table(b, 5);
  std::printf("\n  j   lambda_j(J)    m(j)  lambda_m(Delta_1)\n");
  for (int j = 1; j <= 5; ++j)
    std::printf("  %d   %-13.6f  %-4d  %-13.6f\n", j, table.jacobi[j - 1], test_form_count(j),
                table.hodge[test_form_count(j) - 1]);

  CheckReport ib = check_index_bounds(desc, 2);
  std::printf("\nindex bound gap %.0f (%s)\n", ib.residual_max, ib.pass ? "pass" : "fail");
  return 0;
}
