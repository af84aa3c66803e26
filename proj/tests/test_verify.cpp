#include "fbms/verify.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace fbms;

namespace {

SurfaceDesc disk_desc() { return {SurfaceKind::Disk, 6, 0, 1}; }
SurfaceDesc catenoid_desc() { return {SurfaceKind::Catenoid, 6, 0, 2}; }

}  // namespace

TEST_CASE("check ids round-trip and reports serialize stably") {
  for (const auto& [id, name] : check_id_table()) {
    CHECK(to_string(id) == name);
    CHECK(check_id_from_string(name) == id);
  }
  CHECK_THROWS_AS(check_id_from_string("nope"), std::invalid_argument);

  CheckReport r = make_report(CheckId::BC, "catenoid", 2, 0.25, 0.125, 0.25);
  CHECK(r.pass);  // boundary case: residual == tolerance passes
  CHECK(std::isnan(r.rate));
  CHECK(to_json(r) ==
        "{\"check_id\":\"BC\",\"surface\":\"catenoid\",\"level\":2,"
        "\"residual_max\":0.25,\"residual_l2\":0.125,\"tolerance\":0.25,"
        "\"pass\":true,\"rate\":null}");

  CheckReport bad = make_report(CheckId::JC, "disk", 0, 0.3, 0.1, 0.05);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("sphere quadrature integrates coordinate products exactly") {
  SphereQuadrature g = product_gauss_sphere();
  REQUIRE(g.nodes.size() == 8);
  double wsum = 0;
  for (double w : g.weights) {
    CHECK(w > 0);
    wsum += w;
  }
  CHECK(wsum == Catch::Approx(3.0).epsilon(1e-14));
  CHECK(g.exactness >= 2);

  CheckReport ic = check_ic(g);
  CHECK(ic.surface == "sphere");
  CHECK(ic.pass);
  CHECK(ic.residual_max <= 1e-12);

  // Monte Carlo fallback: honest statistical error, far from both zero and
  // the 1% gate at 1e5 samples.
  CheckReport mc = check_ic(monte_carlo_sphere());
  CHECK(mc.pass);
  CHECK(mc.residual_max < 0.01);
  CHECK(mc.residual_max > 1e-4);
  // fixed seed: the draw is reproducible
  CheckReport mc2 = check_ic(monte_carlo_sphere());
  CHECK(mc2.residual_max == mc.residual_max);
}

TEST_CASE("flat disk identities that vanish identically report zero") {
  // S = 0 and N constant make both sides of the interior identities exactly
  // zero; the residual floor keeps 0/0 from manufacturing noise, so what is
  // left is bare roundoff.
  SurfaceBundle b = make_surface(disk_desc(), 1);
  for (CheckId id : {CheckId::PPC_A, CheckId::PPC_B, CheckId::LAPIP, CheckId::PC1}) {
    CheckReport r = run_identity_check(id, b);
    INFO(to_string(id));
    CHECK(r.residual_max < 1e-10);
    CHECK(r.residual_l2 < 1e-10);
    CHECK(r.pass);
  }
}

TEST_CASE("catenoid interior identity ladders decrease to the pinned tolerance") {
  std::vector<SurfaceBundle> b;
  for (int l = 0; l <= 2; ++l) b.push_back(make_surface(catenoid_desc(), l));

  for (CheckId id : {CheckId::PPC_A, CheckId::PPC_B, CheckId::LAPIP, CheckId::JC}) {
    INFO(to_string(id));
    double prev = std::numeric_limits<double>::infinity();
    CheckReport last;
    for (const SurfaceBundle& bl : b) {
      CheckReport r = run_identity_check(id, bl);
      CHECK(r.residual_max < prev);
      CHECK(r.residual_max > 1e-4);  // a curved surface never hits the floor
      prev = r.residual_max;
      last = r;
    }
    CHECK(last.residual_max < 0.05);
    CHECK(last.residual_l2 < 0.05);
    CHECK(last.pass);
  }
}

TEST_CASE("identity ladder attaches convergence rates") {
  auto ladder = run_identity_ladder(CheckId::JC, catenoid_desc(), {0, 1, 2});
  REQUIRE(ladder.size() == 3);
  CHECK(std::isnan(ladder[0].rate));
  CHECK(ladder[1].rate > 0.8);
  CHECK(ladder[2].rate > 0.8);
  CHECK(ladder[2].level == 2);

  CHECK(convergence_rate(0.4, 0.1) == Catch::Approx(2.0));
  CHECK(std::isnan(convergence_rate(0.1, 0.1)));
  CHECK(std::isnan(convergence_rate(0.0, 0.1)));
}

TEST_CASE("disk jacobi identity on smooth samples stays below one percent") {
  // The analytic test form is an exact Neumann eigen-gradient, so the only
  // residual is cotan truncation away from the centre fan.
  for (int l = 0; l <= 2; ++l) {
    CheckReport r = run_identity_check(CheckId::JC, disk_desc(), l);
    CHECK(r.residual_max < 0.01);
    CHECK(r.residual_l2 < 0.01);
    CHECK(r.pass);
  }
}

TEST_CASE("boundary compatibility residuals shrink along the free boundary") {
  double prev = std::numeric_limits<double>::infinity();
  CheckReport last;
  for (int l = 0; l <= 2; ++l) {
    CheckReport r = run_identity_check(CheckId::BC, catenoid_desc(), l);
    CHECK(r.residual_max < prev);
    prev = r.residual_max;
    last = r;
  }
  CHECK(last.residual_max < 0.10);
  CHECK(last.pass);

  CheckReport d = run_identity_check(CheckId::BC, disk_desc(), 2);
  CHECK(d.residual_max < 0.02);
  CHECK(d.pass);
}

TEST_CASE("pullbacks of ambient constants are discretely harmonic") {
  for (int l = 0; l <= 2; ++l) {
    CheckReport r = run_identity_check(CheckId::PC1, catenoid_desc(), l);
    CHECK(r.residual_max < 0.05);
    CHECK(r.residual_max > 1e-4);
    CHECK(r.pass);
  }
}

TEST_CASE("rotation energies of harmonic forms are strictly negative") {
  for (int l = 0; l <= 2; ++l) {
    CheckReport r = run_identity_check(CheckId::ROS, catenoid_desc(), l);
    CHECK(r.residual_max < 0.10);
    CHECK(r.pass);
  }
  // no harmonic 1-forms on the disk
  SurfaceBundle d = make_surface(disk_desc(), 0);
  CHECK_THROWS_AS(check_ros(d), std::invalid_argument);
}

TEST_CASE("eigenvalue comparison passes with a wide signed margin") {
  SurfaceBundle d = make_surface(disk_desc(), 0);
  CheckReport er_d = check_eigenvalue_inequality(d, 5);
  CHECK(er_d.pass);
  CHECK(er_d.residual_max < -0.5);
  CHECK(er_d.residual_l2 == 0.0);  // no violations at all
  CHECK(er_d.surface == "disk");

  SurfaceBundle c = make_surface(catenoid_desc(), 1);
  CheckReport er_c = check_eigenvalue_inequality(c, 5);
  CHECK(er_c.pass);
  CHECK(er_c.residual_max < -0.9);  // lambda_1(J) < 0 and the gaps are huge
  CHECK(er_c.residual_l2 == 0.0);
}

TEST_CASE("index bound gaps on the two model surfaces") {
  CHECK(index_lower_bound(0, 1) == 0);
  CHECK(index_lower_bound(0, 2) == 1);
  CHECK(index_lower_bound(1, 1) == 1);
  CHECK(index_lower_bound(2, 1) == 2);
  CHECK(index_lower_bound(4, 3) == 4);  // (g, k) = (4, 3): bound without a mesh

  CheckReport ib_d = check_index_bounds(disk_desc(), 2);
  CHECK(ib_d.pass);
  CHECK(ib_d.residual_max == 0.0);  // index 1 meets the requirement exactly

  CheckReport ib_c = check_index_bounds(catenoid_desc(), 2);
  CHECK(ib_c.pass);
  CHECK(ib_c.residual_max == -3.0);  // index 4 against a requirement of 1

  CHECK_THROWS_AS(check_index_bounds(disk_desc(), 0), std::invalid_argument);
}

TEST_CASE("checks demand the data they need") {
  SurfaceDesc syn{SurfaceKind::Synthetic, 4, 1, 1};
  SurfaceBundle b = make_surface(syn, 0);
  CHECK_THROWS_AS(run_identity_check(CheckId::PPC_A, b), std::invalid_argument);
  CHECK_THROWS_AS(analytic_test_form(b), std::invalid_argument);

  SurfaceBundle d = make_surface(disk_desc(), 0);
  CHECK_THROWS_AS(run_identity_check(CheckId::ER, d), std::invalid_argument);
  CHECK_THROWS_AS(run_identity_check(CheckId::IB, d), std::invalid_argument);
}
