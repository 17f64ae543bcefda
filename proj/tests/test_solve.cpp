#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "invfd/pseudogroup.hpp"
#include "invfd/solve.hpp"

using namespace invfd;

namespace {

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double fitted_order(const std::vector<double>& hs,
                    const std::vector<double>& errs) {
  const double n = static_cast<double>(hs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double lx = std::log(hs[i]), ly = std::log(errs[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double secant_solution(double x, double y) {
  const double c = std::cos(x + y);
  return 2.0 / (c * c);
}

double rational_solution(double x, double y) {
  return 2.0 / ((x + y) * (x + y));
}

// Sample an exact solution at every node; solvers read only the edges they
// need from it.
ScalarField sampled(const RectMesh& mesh, double (*f)(double, double)) {
  ScalarField u(mesh.nx(), mesh.ny());
  for (std::size_t m = 0; m < mesh.nx(); ++m)
    for (std::size_t n = 0; n < mesh.ny(); ++n)
      u.at(m, n) = f(mesh.x(m), mesh.y(n));
  return u;
}

double mean_abs_error(const ScalarField& u, const ScalarField& exact) {
  double sum = 0.0;
  for (std::size_t m = 0; m < u.nx(); ++m)
    for (std::size_t n = 0; n < u.ny(); ++n)
      sum += std::abs(u.at(m, n) - exact.at(m, n));
  return sum / static_cast<double>(u.nx() * u.ny());
}

double max_abs_error(const ScalarField& u, const ScalarField& exact) {
  double worst = 0.0;
  for (std::size_t m = 0; m < u.nx(); ++m)
    for (std::size_t n = 0; n < u.ny(); ++n)
      worst = std::max(worst, std::abs(u.at(m, n) - exact.at(m, n)));
  return worst;
}

}  // namespace

TEST_CASE("newton_scalar solves scalar roots") {
  SECTION("linear function converges in one step") {
    const auto r = newton_scalar([](double u) { return u - 2.0; },
                                 [](double) { return 1.0; }, 0.0, 1e-12, 50);
    REQUIRE(r);
    CHECK(r.value() == 2.0);
  }
  SECTION("cube root") {
    const auto r = newton_scalar([](double u) { return u * u * u - 8.0; },
                                 [](double u) { return 3.0 * u * u; }, 3.0,
                                 1e-12, 50);
    REQUIRE(r);
    CHECK(rel_diff(r.value(), 2.0) <= 1e-12);
  }
  SECTION("top-right cell cubic recovers a planted center value") {
    // Plant c = 1.5 as a root of hk c^3 - w22 c + w21 w12 = 0 by choosing
    // w22 accordingly, then solve the corner form from a nearby seed.
    const double h = 0.1, k = 0.1, hk = h * k;
    const double c = 1.5, w21 = 1.2, w12 = 0.8;
    const double w22 = (hk * c * c * c + w21 * w12) / c;

    const auto direct = newton_scalar(
        [&](double u) { return hk * u * u * u - w22 * u + w21 * w12; },
        [&](double u) { return 3.0 * hk * u * u - w22; }, 1.4, 1e-12, 50);
    REQUIRE(direct);
    CHECK(rel_diff(direct.value(), c) <= 1e-10);

    StencilCell cell;
    cell.extent = 3;
    cell.h = h;
    cell.k = k;
    cell.w[2][2] = w22;
    cell.w[2][1] = w21;
    cell.w[1][2] = w12;
    cell.w[1][1] = 1.4;  // seed
    const auto form = solve_corner(SchemeKind::Standard, CellCorner::TopRight, cell);
    REQUIRE(form);
    CHECK(rel_diff(form.value(), c) <= 1e-10);
  }
}

TEST_CASE("march on a 2x2 grid is a single corner solve") {
  const RectMesh mesh = RectMesh::uniform(1.0, 0.3, 2, 2.0, 0.2, 2);
  ScalarField edges(2, 2);
  edges.at(0, 0) = 1.1;
  edges.at(1, 0) = 1.7;
  edges.at(0, 1) = 0.9;
  edges.at(1, 1) = 2.3;

  for (const SchemeKind kind : {SchemeKind::Invariant, SchemeKind::Standard}) {
    for (const GridCorner corner :
         {GridCorner::BottomLeft, GridCorner::BottomRight, GridCorner::TopLeft,
          GridCorner::TopRight}) {
      const MarchReport rep = march_ivp(mesh, edges, kind, corner);
      REQUIRE_FALSE(rep.diverged);
      REQUIRE(rep.field.all_finite());
      // The filled cell satisfies its own equation.
      const auto cell = cell_from_field(rep.field, mesh, 0, 0);
      REQUIRE(cell);
      const auto r = residual(kind, cell.value());
      REQUIRE(r);
      CHECK(std::abs(r.value()) <= 1e-10);
      // The two seeded edges are passed through untouched.
      if (corner == GridCorner::BottomLeft) {
        CHECK(rep.field.at(0, 0) == edges.at(0, 0));
        CHECK(rep.field.at(1, 0) == edges.at(1, 0));
        CHECK(rep.field.at(0, 1) == edges.at(0, 1));
      }
    }
  }

  // Worked value for the invariant bottom-left solve, using the mesh's own
  // recomputed spacings.
  const MarchReport bl = march_ivp(mesh, edges, SchemeKind::Invariant,
                                   GridCorner::BottomLeft);
  const double expected = 1.7 * 0.9 * (1.0 / 1.1 + mesh.dx(0) * mesh.dy(0));
  CHECK(bl.field.at(1, 1) == expected);
}

TEST_CASE("constant boundary march compounds away from the corner") {
  const RectMesh mesh = RectMesh::uniform(0.0, 0.1, 11, 0.0, 0.1, 11);
  const ScalarField ones(11, 11, 1.0);
  const MarchReport rep =
      march_ivp(mesh, ones, SchemeKind::Invariant, GridCorner::BottomLeft);
  REQUIRE_FALSE(rep.diverged);
  REQUIRE(rep.field.all_finite());
  // Each update multiplies in (1/u + hk) > 1/u, so values grow strictly in
  // both directions once off the seeded edges.
  for (std::size_t m = 1; m < 11; ++m)
    for (std::size_t n = 1; n < 11; ++n) {
      CHECK(rep.field.at(m, n) > rep.field.at(m - 1, n));
      CHECK(rep.field.at(m, n) > rep.field.at(m, n - 1));
    }
  CHECK(rel_diff(rep.field.at(10, 10), 3.5623071637914872) <= 1e-12);
}

TEST_CASE("march reproduces the rational solution at first order") {
  struct Expected {
    SchemeKind kind;
    std::vector<double> errs;
    double tol;
  };
  const std::vector<Expected> table = {
      {SchemeKind::Invariant,
       {2.2838246848812249e-3, 1.1281434883667896e-3, 5.6045004083002392e-4,
        2.792987577588113e-4, 1.3941530962924276e-4},
       1e-9},
      {SchemeKind::Standard,
       {7.5173212087504826e-3, 3.5433513115950832e-3, 1.7201565521622886e-3,
        8.4748360653891242e-4, 4.2062855377067443e-4},
       1e-7},
  };
  for (const auto& row : table) {
    std::vector<double> hs, errs;
    for (int j = 0; j < 5; ++j) {
      const double h = 0.1 / std::pow(2.0, j);
      const std::size_t M = static_cast<std::size_t>(std::lround(1.0 / h)) + 1;
      const RectMesh mesh = RectMesh::uniform(1.0, h, M, 1.0, h, M);
      const ScalarField exact = sampled(mesh, rational_solution);
      const MarchReport rep =
          march_ivp(mesh, exact, row.kind, GridCorner::BottomLeft);
      REQUIRE_FALSE(rep.diverged);
      hs.push_back(h);
      errs.push_back(max_abs_error(rep.field, exact));
    }
    for (std::size_t j = 0; j + 1 < errs.size(); ++j)
      CHECK(errs[j + 1] < errs[j]);
    for (std::size_t j = 0; j < errs.size(); ++j)
      CHECK(rel_diff(errs[j], row.errs[j]) <= row.tol);
    const double order = fitted_order(hs, errs);
    CHECK(order >= 0.95);
    CHECK(order <= 1.15);
  }
}

TEST_CASE("init_bvp averages the four corner fills") {
  SECTION("3x3 grid: the interior point is the mean of four cell solves") {
    const RectMesh mesh = RectMesh::uniform(1.0, 0.5, 3, 1.0, 0.5, 3);
    const ScalarField b = sampled(mesh, rational_solution);
    for (const SchemeKind kind : {SchemeKind::Invariant, SchemeKind::Standard}) {
      const BVProblem p{mesh, b, kind, 100, {}, FormsMode::Four};
      const ScalarField u0 = init_bvp(p);
      REQUIRE(u0.all_finite());

      // Reassemble the four single-cell solves directly from boundary data.
      StencilCell cell;
      cell.extent = 3;
      cell.h = mesh.dx(0);
      cell.k = mesh.dy(0);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) cell.w[i][j] = b.at(i, j);
      double sum = 0.0;
      for (const CellCorner which :
           {CellCorner::BottomLeft, CellCorner::BottomRight,
            CellCorner::TopLeft, CellCorner::TopRight}) {
        StencilCell c = cell;
        // Marching seeds the nonlinear form at the known diagonal value.
        c.w[1][1] = b.at(2, 2);
        const auto v = solve_corner(kind, which, c);
        REQUIRE(v);
        sum += v.value();
      }
      CHECK(rel_diff(u0.at(1, 1), sum / 4.0) <= 1e-15);

      // Boundary kept at the given data.
      for (std::size_t m = 0; m < 3; ++m) {
        CHECK(u0.at(m, 0) == b.at(m, 0));
        CHECK(u0.at(m, 2) == b.at(m, 2));
        CHECK(u0.at(0, m) == b.at(0, m));
        CHECK(u0.at(2, m) == b.at(2, m));
      }
    }
  }

  SECTION("symmetric data initializes symmetrically") {
    const RectMesh mesh = RectMesh::uniform(1.0, 0.1, 11, 1.0, 0.1, 11);
    const ScalarField b = sampled(mesh, secant_solution);
    for (const SchemeKind kind : {SchemeKind::Invariant, SchemeKind::Standard}) {
      const BVProblem p{mesh, b, kind, 100, {}, FormsMode::Four};
      const ScalarField u0 = init_bvp(p);
      REQUIRE(u0.all_finite());
      for (std::size_t m = 0; m < 11; ++m)
        for (std::size_t n = 0; n < 11; ++n)
          CHECK(std::abs(u0.at(m, n) - u0.at(n, m)) <= 1e-12);
    }
  }

  SECTION("initialization errors on the coarse secant problem") {
    const RectMesh mesh = RectMesh::uniform(1.0, 0.1, 11, 1.0, 0.1, 11);
    const ScalarField exact = sampled(mesh, secant_solution);
    const BVProblem pi{mesh, exact, SchemeKind::Invariant, 100, {},
                       FormsMode::Four};
    const BVProblem ps{mesh, exact, SchemeKind::Standard, 100, {},
                       FormsMode::Four};
    CHECK(rel_diff(mean_abs_error(init_bvp(pi), exact),
                   0.07038193859841757) <= 1e-6);
    CHECK(rel_diff(mean_abs_error(init_bvp(ps), exact),
                   0.3331802872917809) <= 1e-6);
  }
}

TEST_CASE("relax fixes scheme-exact fields and is deterministic") {
  const RectMesh mesh = RectMesh::uniform(1.0, 0.1, 11, 1.0, 0.1, 11);
  const ScalarField exact = sampled(mesh, secant_solution);
  for (const SchemeKind kind : {SchemeKind::Invariant, SchemeKind::Standard}) {
    // A marched field satisfies every cell equation, so it is a fixed point.
    const MarchReport fill =
        march_ivp(mesh, exact, kind, GridCorner::BottomLeft);
    REQUIRE_FALSE(fill.diverged);

    BVProblem p{mesh, fill.field, kind, 3, {}, FormsMode::Four};
    const SolveReport rep = relax(p, fill.field);
    REQUIRE_FALSE(rep.diverged);
    CHECK(rep.iterations_run == 3);
    CHECK(rep.max_update_last_sweep <= 1e-12);
    CHECK(max_abs_error(rep.field, fill.field) <= 1e-11);

    // Bit-identical reruns.
    const SolveReport again = relax(p, fill.field);
    CHECK(again.iterations_run == rep.iterations_run);
    CHECK(again.max_update_last_sweep == rep.max_update_last_sweep);
    for (std::size_t m = 0; m < 11; ++m)
      for (std::size_t n = 0; n < 11; ++n)
        CHECK(again.field.at(m, n) == rep.field.at(m, n));

    // With a tolerance set, the first quiet sweep stops the run.
    p.tolerance = 1e-9;
    p.iterations = 50;
    const SolveReport early = relax(p, fill.field);
    CHECK(early.iterations_run == 1);
  }
}

TEST_CASE("relax reproduces the coarse secant error levels") {
  struct Cell {
    double h;
    SchemeKind kind;
    double mean_all;
    double init_mean_all;
    double tol;
  };
  // Mean absolute error over all nodes after 100 sweeps, against the exact
  // secant solution on [1,2]^2.
  const std::vector<Cell> cells = {
      {0.1, SchemeKind::Invariant, 0.046681448550650574, 0.07038193859841757, 1e-6},
      {0.1, SchemeKind::Standard, 0.27766900991379384, 0.3331802872917809, 1e-4},
      {0.05, SchemeKind::Invariant, 0.033017271640181478, 0.045534215097823967, 1e-6},
      {0.05, SchemeKind::Standard, 0.12692855240330911, 0.16985676486191478, 1e-4},
  };
  for (const Cell& cell : cells) {
    const std::size_t M =
        static_cast<std::size_t>(std::lround(1.0 / cell.h)) + 1;
    const RectMesh mesh = RectMesh::uniform(1.0, cell.h, M, 1.0, cell.h, M);
    const ScalarField exact = sampled(mesh, secant_solution);
    const BVProblem p{mesh, exact, cell.kind, 100, {}, FormsMode::Four};
    const ScalarField u0 = init_bvp(p);
    const SolveReport rep = relax(p, u0);
    REQUIRE_FALSE(rep.diverged);
    CHECK(rep.iterations_run == 100);
    const double init_err = mean_abs_error(u0, exact);
    const double err = mean_abs_error(rep.field, exact);
    CHECK(rel_diff(init_err, cell.init_mean_all) <= cell.tol);
    CHECK(rel_diff(err, cell.mean_all) <= cell.tol);
    // Relaxation improves on the four-corner initialization.
    CHECK(err <= init_err);
  }
}

TEST_CASE("standard relaxation diverges near the singular line") {
  // On [0.84, 1.84]^2 the domain corner sits close to the pole of the secant
  // solution; the standard scheme's corner fills overflow there while the
  // invariant scheme stays bounded.
  const std::size_t M = 101;
  const RectMesh mesh = RectMesh::uniform(0.84, 0.01, M, 0.84, 0.01, M);
  const ScalarField exact = sampled(mesh, secant_solution);

  const MarchReport bl =
      march_ivp(mesh, exact, SchemeKind::Standard, GridCorner::BottomLeft);
  CHECK(bl.diverged);

  const BVProblem std_problem{mesh, exact, SchemeKind::Standard, 100, {},
                              FormsMode::Four};
  const ScalarField std_init = init_bvp(std_problem);
  CHECK_FALSE(std_init.all_finite());
  const SolveReport std_rep = relax(std_problem, std_init);
  CHECK(std_rep.diverged);

  const BVProblem inv_problem{mesh, exact, SchemeKind::Invariant, 100, {},
                              FormsMode::Four};
  const ScalarField inv_init = init_bvp(inv_problem);
  REQUIRE(inv_init.all_finite());
  const SolveReport inv_rep = relax(inv_problem, inv_init);
  REQUIRE_FALSE(inv_rep.diverged);
  CHECK(inv_rep.field.all_finite());
}

TEST_CASE("transformed marched solutions stay scheme-exact") {
  const RectMesh mesh = RectMesh::uniform(1.0, 0.1, 11, 1.0, 0.1, 11);
  const ScalarField exact = sampled(mesh, secant_solution);
  for (const SchemeKind kind : {SchemeKind::Invariant, SchemeKind::Standard}) {
    const MarchReport fill =
        march_ivp(mesh, exact, kind, GridCorner::BottomLeft);
    REQUIRE_FALSE(fill.diverged);
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const GroupElementG2 el = random_element_g2(11000 + s);
      const TransformedRect tr = act_discrete_g2(el, mesh, fill.field);
      for (std::size_t m = 0; m + 1 < tr.field.nx(); ++m)
        for (std::size_t n = 0; n + 1 < tr.field.ny(); ++n) {
          const auto cell = cell_from_field(tr.field, tr.mesh, m, n);
          REQUIRE(cell);
          const auto r = residual(kind, cell.value());
          REQUIRE(r);
          worst = std::max(worst, std::abs(r.value()));
        }
    }
    if (kind == SchemeKind::Invariant) {
      CHECK(worst <= 1e-10);
    } else {
      CHECK(worst > 1e-3);
    }
  }
}

TEST_CASE("solver guards reject malformed problems") {
  const RectMesh mesh3 = RectMesh::uniform(1.0, 0.5, 3, 1.0, 0.5, 3);
  const ScalarField good(3, 3, 1.0);

  SECTION("size and shape checks throw") {
    CHECK_THROWS_AS(march_ivp(mesh3, ScalarField(2, 2, 1.0),
                              SchemeKind::Invariant, GridCorner::BottomLeft),
                    std::invalid_argument);
    const RectMesh flat = RectMesh::uniform(0.0, 1.0, 4, 0.0, 1.0, 2);
    const BVProblem p{flat, ScalarField(4, 2, 1.0), SchemeKind::Invariant,
                      10, {}, FormsMode::Four};
    CHECK_THROWS_AS(init_bvp(p), std::invalid_argument);
    const BVProblem ok{mesh3, good, SchemeKind::Invariant, 10, {},
                       FormsMode::Four};
    CHECK_THROWS_AS(relax(ok, ScalarField(4, 4, 1.0)), std::invalid_argument);
  }

  SECTION("zero boundary values are rejected") {
    ScalarField bad = good;
    bad.at(0, 1) = 0.0;
    const BVProblem p{mesh3, bad, SchemeKind::Invariant, 10, {},
                      FormsMode::Four};
    CHECK_THROWS_AS(init_bvp(p), std::invalid_argument);
    CHECK_THROWS_AS(relax(p, good), std::invalid_argument);
  }

  SECTION("a zero edge value marks the march diverged at the first cell") {
    ScalarField edges(3, 3, 1.0);
    edges.at(0, 0) = 0.0;
    const MarchReport rep =
        march_ivp(mesh3, edges, SchemeKind::Invariant, GridCorner::BottomLeft);
    CHECK(rep.diverged);
    CHECK(rep.fail_m == 1);
    CHECK(rep.fail_n == 1);
    CHECK_FALSE(std::isfinite(rep.field.at(1, 1)));
  }

  SECTION("a failed update freezes the field") {
    ScalarField init = good;
    init.at(1, 1) = std::numeric_limits<double>::quiet_NaN();
    const BVProblem p{mesh3, good, SchemeKind::Standard, 10, {},
                      FormsMode::Four};
    const SolveReport rep = relax(p, init);
    CHECK(rep.diverged);
    CHECK(rep.iterations_run == 0);
    CHECK(rep.fail_m == 1);
    CHECK(rep.fail_n == 1);
    CHECK(std::isnan(rep.field.at(1, 1)));
    for (std::size_t m = 0; m < 3; ++m) {
      CHECK(rep.field.at(m, 0) == 1.0);
      CHECK(rep.field.at(m, 2) == 1.0);
    }
  }

  SECTION("runaway interior growth trips the divergence threshold") {
    const ScalarField huge(3, 3, 1e8);
    const BVProblem p{mesh3, huge, SchemeKind::Invariant, 10, {},
                      FormsMode::Four};
    const SolveReport rep = relax(p, huge);
    CHECK(rep.diverged);
    CHECK(rep.iterations_run == 1);
    CHECK(rep.fail_m == 1);
    CHECK(rep.fail_n == 1);
    CHECK(std::isfinite(rep.field.at(1, 1)));
    CHECK(std::abs(rep.field.at(1, 1)) > 1e12);
  }
}
