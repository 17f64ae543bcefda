#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "invfd/bench.hpp"

using namespace invfd;

namespace {

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Table drivers are the slow part of this suite; run each once and share.
const std::vector<Table1Row>& cached_table1() {
  static const std::vector<Table1Row> rows = run_table1();
  return rows;
}

const std::vector<Table2Row>& cached_table2() {
  static const std::vector<Table2Row> rows = run_table2();
  return rows;
}

const ConvergenceRow& row_named(const std::vector<ConvergenceRow>& rows,
                                const std::string& name) {
  for (const ConvergenceRow& r : rows)
    if (r.quantity == name) return r;
  throw std::logic_error("missing convergence row " + name);
}

}  // namespace

TEST_CASE("exact solutions satisfy the pde and their stated partials") {
  const double pts[3][2] = {{1.1, 1.3}, {0.25, 0.35}, {1.9, 1.7}};
  for (const SolutionKind kind : {SolutionKind::Rational, SolutionKind::Secant,
                                  SolutionKind::Exponential}) {
    // Construction runs the 100-point PDE probe; it must not throw.
    const ExactSolution sol(kind);
    CHECK(sol.kind() == kind);

    for (const auto& p : pts) {
      const double x = p[0], y = p[1];
      // First partials against central differences.
      const double d1 = 1e-5;
      const double fx = (sol.u(x + d1, y) - sol.u(x - d1, y)) / (2.0 * d1);
      const double fy = (sol.u(x, y + d1) - sol.u(x, y - d1)) / (2.0 * d1);
      CHECK(rel_diff(sol.ux(x, y), fx) <= 1e-6);
      CHECK(rel_diff(sol.uy(x, y), fy) <= 1e-6);
      CHECK(sol.ux(x, y) == sol.uy(x, y));  // function of x + y only

      // Mixed partial against the four-point cross difference.
      const double d2 = 1e-4;
      const double fxy = (sol.u(x + d2, y + d2) - sol.u(x + d2, y - d2) -
                          sol.u(x - d2, y + d2) + sol.u(x - d2, y - d2)) /
                         (4.0 * d2 * d2);
      CHECK(rel_diff(sol.uxy(x, y), fxy) <= 1e-6);
    }

    // The defining identity (u u_xy - u_x u_y)/u^3 = 1 holds to roundoff on
    // a singularity-free grid.
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const double x = 0.8 + 0.35 * i;
        const double y = 0.8 + 0.35 * j;
        const auto i11 =
            continuous_invariant_I11(sol.u(x, y), sol.ux(x, y), sol.uy(x, y),
                                     sol.uxy(x, y));
        REQUIRE(i11);
        CHECK(std::abs(i11.value() - 1.0) <= 1e-12);
      }
  }

  SECTION("singular-line detection") {
    const ExactSolution secant(SolutionKind::Secant);
    CHECK(secant.domain_clear(2.0, 4.0));          // between pi/2 and 3pi/2
    CHECK_FALSE(secant.domain_clear(1.4, 3.4));    // contains pi/2
    CHECK_FALSE(secant.domain_clear(4.6, 4.8));    // contains 3pi/2
    const ExactSolution rational(SolutionKind::Rational);
    CHECK(rational.domain_clear(1.0, 9.0));
    CHECK(rational.domain_clear(-9.0, -1.0));
    CHECK_FALSE(rational.domain_clear(-1.0, 1.0));  // contains s = 0
    const ExactSolution expo(SolutionKind::Exponential);
    CHECK(expo.domain_clear(0.5, 2.0));
    CHECK_FALSE(expo.domain_clear(-0.5, 0.5));
  }

  SECTION("solution names") {
    CHECK(std::string(solution_name(SolutionKind::Rational)) == "rational");
    CHECK(std::string(solution_name(SolutionKind::Secant)) == "secant");
    CHECK(std::string(solution_name(SolutionKind::Exponential)) ==
          "exponential");
  }
}

TEST_CASE("experiment driver reproduces the frozen coarse cell and rejects bad configs") {
  ExperimentConfig c;  // secant, [1,2]^2, h=k=0.1, invariant, 100 sweeps
  const auto rep = run_experiment(c);
  REQUIRE(rep);
  CHECK_FALSE(rep.value().diverged);
  CHECK(std::abs(rep.value().mean_abs - 0.046681448550650574) <= 1e-6);
  CHECK(rep.value().mean_abs_interior > rep.value().mean_abs);
  CHECK(rep.value().max_abs >= rep.value().mean_abs_interior);
  CHECK(rep.value().runtime_ms >= 0);

  SECTION("full-run artifacts are consistent with the report") {
    const auto run = run_bvp(c);
    REQUIRE(run);
    CHECK(run.value().mesh.nx() == 11);
    CHECK(run.value().mesh.ny() == 11);
    CHECK(run.value().field.all_finite());
    CHECK(run.value().report.mean_abs == rep.value().mean_abs);
    // Boundary is held at the exact solution.
    const ExactSolution sol(SolutionKind::Secant);
    for (std::size_t m = 0; m < 11; ++m) {
      CHECK(run.value().field.at(m, 0) ==
            sol.u(run.value().mesh.x(m), run.value().mesh.y(0)));
      CHECK(run.value().field.at(m, 10) ==
            sol.u(run.value().mesh.x(m), run.value().mesh.y(10)));
    }
  }

  SECTION("singular domains are rejected unless forced") {
    ExperimentConfig bad = c;
    bad.x0 = bad.y0 = 0.7;  // x + y crosses pi/2
    const auto r = run_experiment(bad);
    REQUIRE_FALSE(r);
    CHECK(r.error().find("singular") != std::string::npos);
    bad.allow_singular = true;
    CHECK(run_experiment(bad));
  }

  SECTION("usage guards") {
    ExperimentConfig bad = c;
    bad.h = 0.0;
    CHECK_FALSE(run_experiment(bad));
    bad = c;
    bad.iterations = -1;
    CHECK_FALSE(run_experiment(bad));
    bad = c;
    bad.width = 0.1;  // two columns: enough to march, not to relax
    CHECK_FALSE(run_experiment(bad));
    const auto ivp = run_ivp(bad, GridCorner::BottomLeft);
    REQUIRE(ivp);
    CHECK_FALSE(ivp.value().report.diverged);
  }

  SECTION("ivp runs all four corners") {
    // Marching accumulates first-order error; at h = 0.1 the worst start
    // (bottom-left, marching toward the pole) still stays bounded, and the
    // invariant scheme beats the standard one from every corner.
    for (const GridCorner corner :
         {GridCorner::BottomLeft, GridCorner::BottomRight, GridCorner::TopLeft,
          GridCorner::TopRight}) {
      const auto inv = run_ivp(c, corner);
      REQUIRE(inv);
      CHECK_FALSE(inv.value().report.diverged);
      CHECK(inv.value().field.all_finite());
      CHECK(inv.value().report.mean_abs < 1.0);
      CHECK(inv.value().report.max_abs < 5.0);
      ExperimentConfig sc = c;
      sc.kind = SchemeKind::Standard;
      const auto std_run = run_ivp(sc, corner);
      REQUIRE(std_run);
      CHECK(inv.value().report.mean_abs < std_run.value().report.mean_abs);
    }
  }
}

TEST_CASE("table 1 matches the published magnitudes and orderings") {
  const auto& rows = cached_table1();
  REQUIRE(rows.size() == 8);

  // Row layout: standard at h = 0.1, 0.05, 0.01, 0.005, then invariant.
  const double hs[4] = {0.1, 0.05, 0.01, 0.005};
  for (int i = 0; i < 8; ++i) {
    CHECK(rows[i].kind ==
          (i < 4 ? SchemeKind::Standard : SchemeKind::Invariant));
    CHECK(rows[i].h == hs[i % 4]);
    CHECK(rows[i].k == hs[i % 4]);
    CHECK_FALSE(rows[i].report.diverged);
  }

  // Frozen cells at the two coarse resolutions.
  CHECK(std::abs(rows[0].report.mean_abs - 0.27766900991379384) <= 1e-4);
  CHECK(std::abs(rows[1].report.mean_abs - 0.12692855240330911) <= 1e-4);
  CHECK(std::abs(rows[4].report.mean_abs - 0.046681448550650574) <= 1e-6);
  CHECK(std::abs(rows[5].report.mean_abs - 0.033017271640181478) <= 1e-6);

  // Published error magnitudes, all eight cells within the acceptance band.
  const double published_std[4] = {2.19e-1, 1.07e-1, 3.23e-2, 1.66e-2};
  const double published_inv[4] = {4.12e-2, 2.75e-2, 1.03e-2, 5.42e-3};
  for (int j = 0; j < 4; ++j) {
    CHECK(std::abs(rows[j].report.mean_abs - published_std[j]) <=
          0.35 * published_std[j]);
    CHECK(std::abs(rows[4 + j].report.mean_abs - published_inv[j]) <=
          0.35 * published_inv[j]);
    // The invariant scheme beats the standard one in every column.
    CHECK(rows[4 + j].report.mean_abs < rows[j].report.mean_abs);
  }

  // Errors shrink under refinement for both schemes.
  for (int j = 0; j + 1 < 4; ++j) {
    CHECK(rows[j + 1].report.mean_abs < rows[j].report.mean_abs);
    CHECK(rows[5 + j].report.mean_abs < rows[4 + j].report.mean_abs);
  }

  SECTION("rerunning the driver reproduces every byte") {
    const auto again = run_table1();
    REQUIRE(again.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      CHECK(again[i].report.mean_abs == rows[i].report.mean_abs);
    CHECK(to_csv(again) == to_csv(rows));
  }
}

TEST_CASE("table 2 reproduces the blow-up study near the singular line") {
  const auto& rows = cached_table2();
  REQUIRE(rows.size() == 8);
  const double x0s[4] = {0.87, 0.86, 0.85, 0.84};
  for (int i = 0; i < 8; ++i) {
    CHECK(rows[i].kind ==
          (i < 4 ? SchemeKind::Standard : SchemeKind::Invariant));
    CHECK(rows[i].x0 == x0s[i % 4]);
  }

  // Standard scheme: finite at the two outer offsets, divergent after.
  CHECK_FALSE(rows[0].report.diverged);
  CHECK_FALSE(rows[1].report.diverged);
  CHECK(rel_diff(rows[0].report.max_abs, 2.3911) <= 1e-3);
  CHECK(rel_diff(rows[1].report.max_abs, 5.5218) <= 1e-3);
  CHECK(rows[2].report.diverged);
  CHECK(rows[3].report.diverged);
  CHECK(std::isinf(rows[2].report.max_abs));
  CHECK(std::isinf(rows[3].report.mean_abs));

  // Invariant scheme: finite throughout, growing toward the pole.
  const double frozen_inv[4] = {0.3277, 0.4494, 0.6778, 1.2255};
  for (int j = 0; j < 4; ++j) {
    CHECK_FALSE(rows[4 + j].report.diverged);
    CHECK(std::abs(rows[4 + j].report.max_abs - frozen_inv[j]) <= 5e-4);
    if (j > 0)
      CHECK(rows[4 + j].report.max_abs > rows[3 + j].report.max_abs);
  }
}

TEST_CASE("invariance suite holds for all groups and the naive control drifts") {
  const InvarianceReport g1 = run_invariance_suite(GroupKind::G1, 25, 0);
  CHECK(g1.group == GroupKind::G1);
  CHECK(g1.trials == 25);
  CHECK(g1.pass);
  CHECK(g1.worst_drift <= 1e-9);
  CHECK(g1.worst_drift > 0.0);
  CHECK(g1.control_drift == 0.0);  // control is defined on the G2 run only

  const InvarianceReport g2 = run_invariance_suite(GroupKind::G2, 25, 0);
  CHECK(g2.pass);
  CHECK(g2.worst_drift <= 1e-9);
  CHECK(g2.control_drift > 1e-3);

  const InvarianceReport g3 = run_invariance_suite(GroupKind::G3, 25, 0);
  CHECK(g3.pass);
  CHECK(g3.worst_drift <= 1e-9);

  SECTION("seeded runs are bitwise reproducible") {
    const InvarianceReport again = run_invariance_suite(GroupKind::G2, 25, 0);
    CHECK(again.worst_drift == g2.worst_drift);
    CHECK(again.control_drift == g2.control_drift);
  }

  SECTION("csv summary") {
    const std::string csv = to_csv(std::vector<InvarianceReport>{g1, g2, g3});
    CHECK(csv.rfind("group,trials,worst_drift,control_drift,pass\n", 0) == 0);
    CHECK(csv.find("g2,25,") != std::string::npos);
  }
}

TEST_CASE("convergence suite observes first order everywhere") {
  const auto rows = run_convergence_suite();
  REQUIRE(rows.size() == 20);
  for (const ConvergenceRow& r : rows) {
    INFO(r.quantity);
    CHECK(r.pass);
    CHECK(r.observed_order >= 0.8);
    CHECK(r.observed_order <= 1.2);
    CHECK(r.last_error < r.first_error);
  }

  // Spot-check frozen first-level errors of a few rows.
  CHECK(rel_diff(row_named(rows, "g1_I01d").first_error, 3.63e-2) <= 2e-2);
  CHECK(rel_diff(row_named(rows, "g1_I02d").first_error, 1.40e-1) <= 2e-2);
  CHECK(rel_diff(row_named(rows, "g1_I11d").first_error, 9.32e-2) <= 2e-2);
  CHECK(rel_diff(row_named(rows, "g3_I03d").first_error, 1.28e-1) <= 2e-2);
  CHECK(rel_diff(row_named(rows, "g3_I12d").first_error, 1.65e-2) <= 2e-2);
  CHECK(rel_diff(row_named(rows, "residual_invariant_secant").first_error,
                 3.988e-2) <= 2e-2);
  CHECK(rel_diff(row_named(rows, "residual_standard_secant").first_error,
                 1.212e-1) <= 2e-2);

  const std::string csv = to_csv(rows);
  CHECK(csv.rfind("quantity,first_error,last_error,observed_order,pass\n", 0) ==
        0);
}

TEST_CASE("csv output round-trips exactly and dumps are consistent") {
  SECTION("table 1") {
    const auto& rows = cached_table1();
    const std::string csv = to_csv(rows);
    CHECK(csv.rfind("scheme,h,k,mean_abs_error,diverged\n", 0) == 0);
    CHECK(to_csv(rows) == csv);  // emission is deterministic
    const auto parsed = table1_from_csv(csv);
    REQUIRE(parsed);
    REQUIRE(parsed.value().size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(parsed.value()[i].kind == rows[i].kind);
      CHECK(parsed.value()[i].h == rows[i].h);
      CHECK(parsed.value()[i].k == rows[i].k);
      CHECK(parsed.value()[i].report.mean_abs == rows[i].report.mean_abs);
      CHECK(parsed.value()[i].report.diverged == rows[i].report.diverged);
    }
  }

  SECTION("table 2 including infinity sentinels") {
    const auto& rows = cached_table2();
    const std::string csv = to_csv(rows);
    CHECK(csv.rfind("scheme,x0,y0,h,k,max_abs_error,diverged\n", 0) == 0);
    const auto parsed = table2_from_csv(csv);
    REQUIRE(parsed);
    REQUIRE(parsed.value().size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(parsed.value()[i].kind == rows[i].kind);
      CHECK(parsed.value()[i].x0 == rows[i].x0);
      CHECK(parsed.value()[i].report.max_abs == rows[i].report.max_abs);
      CHECK(parsed.value()[i].report.diverged == rows[i].report.diverged);
    }
    // The diverged standard rows carry the non-finite sentinel through text.
    CHECK(std::isinf(parsed.value()[2].report.max_abs));
  }

  SECTION("malformed input is rejected") {
    CHECK_FALSE(table1_from_csv(""));
    CHECK_FALSE(table1_from_csv("not,a,header\n"));
    CHECK_FALSE(
        table1_from_csv("scheme,h,k,mean_abs_error,diverged\nstandard,0.1\n"));
    CHECK_FALSE(table1_from_csv(
        "scheme,h,k,mean_abs_error,diverged\nstandard,0.1,0.1,oops,0\n"));
    CHECK_FALSE(table1_from_csv(
        "scheme,h,k,mean_abs_error,diverged\ncentered,0.1,0.1,1.0,0\n"));
    CHECK_FALSE(table2_from_csv("scheme,h,k,mean_abs_error,diverged\n"));
  }

  SECTION("solution dump") {
    ExperimentConfig c;
    c.h = c.k = 0.25;
    const auto run = run_bvp(c);
    REQUIRE(run);
    const auto rows = dump_rows(run.value());
    REQUIRE(rows.size() == 25);
    const std::string csv = to_csv(rows);
    CHECK(csv.rfind("x,y,u_numeric,u_exact,error\n", 0) == 0);
    std::size_t lines = 0;
    for (const char ch : csv)
      if (ch == '\n') ++lines;
    CHECK(lines == 26);

    const ExactSolution sol(SolutionKind::Secant);
    for (const SolutionDumpRow& r : rows) {
      CHECK(r.u_exact == sol.u(r.x, r.y));
      CHECK(r.error == std::abs(r.u_numeric - r.u_exact));
    }
    // Boundary rows are exact.
    CHECK(rows.front().error == 0.0);
    CHECK(rows.back().error == 0.0);
  }
}
