#pragma once
// Grid solvers built on the corner forms: initial-value marching from one
// corner of a rectangle, boundary-value initialization by averaging the four
// corner marches, and Gauss-Seidel relaxation of the nine-point update.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "invfd/common.hpp"
#include "invfd/grid.hpp"
#include "invfd/schemes.hpp"

namespace invfd {

// Corner of the rectangle where an initial-value march starts; the two grid
// edges meeting there carry the given data.
enum class GridCorner { BottomLeft, BottomRight, TopLeft, TopRight };

// Result of a corner march.  The field is always fully written; if any cell
// came out non-finite the report is flagged and (fail_m, fail_n) is the first
// such cell in fill order.
struct MarchReport {
  ScalarField field;
  bool diverged = false;
  std::size_t fail_m = 0;
  std::size_t fail_n = 0;
};

namespace detail {

// Solve one cell equation for the value at (cm, cn).  The 3x3 window is
// centered there so `which` names the 2x2 cell being used; entries outside
// the grid are padded with NaN and are never read by the selected form.
// `seed` lands on the center slot and starts the one nonlinear form.
inline Result<double> solve_at(SchemeKind kind, const ScalarField& u, double h,
                               double k, std::size_t cm, std::size_t cn,
                               CellCorner which, double seed) {
  StencilCell cell;
  cell.extent = 3;
  cell.h = h;
  cell.k = k;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const bool inside = cm + i >= 1 && cm + i <= u.nx() && cn + j >= 1 &&
                          cn + j <= u.ny();
      cell.w[i][j] = inside ? u.at(cm + i - 1, cn + j - 1) : nan;
    }
  }
  cell.w[1][1] = seed;
  return solve_corner(kind, which, cell);
}

}  // namespace detail

// March the whole grid from two adjacent edges, repeatedly solving the cell
// equation that points away from the starting corner.  Rows are filled
// moving away from the corner, each row swept away from its seeded edge.
// Non-finite cells do not stop the fill; they are reported and propagate.
inline MarchReport march_ivp(const RectMesh& mesh, const ScalarField& edges,
                             SchemeKind kind, GridCorner start) {
  const std::size_t M = mesh.nx(), N = mesh.ny();
  if (edges.nx() != M || edges.ny() != N)
    throw std::invalid_argument("march_ivp: field/mesh size mismatch");
  if (M < 2 || N < 2)
    throw std::invalid_argument("march_ivp: need at least a 2x2 grid");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  MarchReport report{ScalarField(M, N, nan)};
  ScalarField& u = report.field;

  // Copy the two edges adjacent to the starting corner.
  const bool right = start == GridCorner::BottomRight || start == GridCorner::TopRight;
  const bool top = start == GridCorner::TopLeft || start == GridCorner::TopRight;
  const std::size_t me = right ? M - 1 : 0;
  const std::size_t ne = top ? N - 1 : 0;
  for (std::size_t n = 0; n < N; ++n) u.at(me, n) = edges.at(me, n);
  for (std::size_t m = 0; m < M; ++m) u.at(m, ne) = edges.at(m, ne);

  auto write = [&](std::size_t m, std::size_t n, const Result<double>& v) {
    const double value = v ? v.value() : nan;
    u.at(m, n) = value;
    if (!report.diverged && !std::isfinite(value)) {
      report.diverged = true;
      report.fail_m = m;
      report.fail_n = n;
    }
  };

  // Each step solves the 2x2 cell with bottom-left index (m, n) for the
  // corner opposite the known data; spacings are that cell's own.
  switch (start) {
    case GridCorner::BottomLeft:
      for (std::size_t n = 0; n + 1 < N; ++n)
        for (std::size_t m = 0; m + 1 < M; ++m)
          write(m + 1, n + 1,
                detail::solve_at(kind, u, mesh.dx(m), mesh.dy(n), m + 1, n + 1,
                                 CellCorner::BottomLeft, nan));
      break;
    case GridCorner::BottomRight:
      for (std::size_t n = 0; n + 1 < N; ++n)
        for (std::size_t m = M - 1; m-- > 0;)
          write(m, n + 1,
                detail::solve_at(kind, u, mesh.dx(m), mesh.dy(n), m, n + 1,
                                 CellCorner::BottomRight, nan));
      break;
    case GridCorner::TopLeft:
      for (std::size_t n = N - 1; n-- > 0;)
        for (std::size_t m = 0; m + 1 < M; ++m)
          write(m + 1, n,
                detail::solve_at(kind, u, mesh.dx(m), mesh.dy(n), m + 1, n,
                                 CellCorner::TopLeft, nan));
      break;
    case GridCorner::TopRight:
      // The unknown enters its own cell nonlinearly for the standard scheme;
      // the already known diagonal neighbour seeds the Newton solve.
      for (std::size_t n = N - 1; n-- > 0;)
        for (std::size_t m = M - 1; m-- > 0;)
          write(m, n,
                detail::solve_at(kind, u, mesh.dx(m), mesh.dy(n), m, n,
                                 CellCorner::TopRight, u.at(m + 1, n + 1)));
      break;
  }
  return report;
}

// A Dirichlet problem for one scheme on a rectangle: u given on all four
// edges, solved by initialization plus a fixed number of relaxation sweeps.
struct BVProblem {
  RectMesh mesh;
  ScalarField boundary;  // read on the four edges only
  SchemeKind kind = SchemeKind::Invariant;
  int iterations = 100;
  std::optional<double> tolerance{};  // early stop once max update drops below
  FormsMode forms = FormsMode::Four;
};

struct SolveReport {
  ScalarField field;
  int iterations_run = 0;
  double max_update_last_sweep = 0.0;
  bool diverged = false;
  std::size_t fail_m = 0;
  std::size_t fail_n = 0;
};

namespace detail {

inline void validate_bvp(const BVProblem& p) {
  const std::size_t M = p.mesh.nx(), N = p.mesh.ny();
  if (p.boundary.nx() != M || p.boundary.ny() != N)
    throw std::invalid_argument("BVProblem: boundary/mesh size mismatch");
  if (M < 3 || N < 3)
    throw std::invalid_argument("BVProblem: need at least a 3x3 grid");
  auto check = [&](std::size_t m, std::size_t n) {
    const double v = p.boundary.at(m, n);
    if (v == 0.0 || !std::isfinite(v))
      throw std::invalid_argument("BVProblem: boundary value at (" +
                                  std::to_string(m) + "," + std::to_string(n) +
                                  ") must be finite and nonzero");
  };
  for (std::size_t n = 0; n < N; ++n) {
    check(0, n);
    check(M - 1, n);
  }
  for (std::size_t m = 0; m < M; ++m) {
    check(m, 0);
    check(m, N - 1);
  }
}

}  // namespace detail

// Initialize the interior as the pointwise mean of the four corner marches,
// each started from the two boundary edges adjacent to its corner.  A
// non-finite cell in any march carries into the mean, so a diverging fill
// leaves a visible non-finite imprint rather than being silently dropped.
// The boundary itself is kept at the given data.
inline ScalarField init_bvp(const BVProblem& p) {
  detail::validate_bvp(p);
  const std::size_t M = p.mesh.nx(), N = p.mesh.ny();
  ScalarField sum(M, N, 0.0);
  const std::array<GridCorner, 4> corners = {
      GridCorner::BottomLeft, GridCorner::BottomRight, GridCorner::TopLeft,
      GridCorner::TopRight};
  for (const GridCorner corner : corners) {
    const MarchReport fill = march_ivp(p.mesh, p.boundary, p.kind, corner);
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t n = 0; n < N; ++n)
        sum.at(m, n) += fill.field.at(m, n);
  }
  ScalarField u(M, N, 0.0);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t n = 0; n < N; ++n) u.at(m, n) = sum.at(m, n) / 4.0;
  for (std::size_t n = 0; n < N; ++n) {
    u.at(0, n) = p.boundary.at(0, n);
    u.at(M - 1, n) = p.boundary.at(M - 1, n);
  }
  for (std::size_t m = 0; m < M; ++m) {
    u.at(m, 0) = p.boundary.at(m, 0);
    u.at(m, N - 1) = p.boundary.at(m, N - 1);
  }
  return u;
}

// Gauss-Seidel sweeps of the nine-point update over the interior, always
// left-to-right then bottom-to-top, reusing values updated earlier in the
// same sweep.  A failed or non-finite update stops the run with the field
// frozen at its last finite state; interior growth past 1e12 counts as
// divergence as well (checked after every sweep).
inline SolveReport relax(const BVProblem& p, const ScalarField& initial) {
  detail::validate_bvp(p);
  const std::size_t M = p.mesh.nx(), N = p.mesh.ny();
  if (initial.nx() != M || initial.ny() != N)
    throw std::invalid_argument("relax: initial field/mesh size mismatch");

  SolveReport report{initial};
  ScalarField& u = report.field;
  for (int it = 0; it < p.iterations; ++it) {
    double max_update = 0.0;
    for (std::size_t n = 1; n + 1 < N; ++n) {
      for (std::size_t m = 1; m + 1 < M; ++m) {
        // Window base (m-1, n-1) puts the point being updated at the center.
        const auto cell = cell_from_field(u, p.mesh, m - 1, n - 1, 3);
        const auto value =
            cell ? nine_point_update(p.kind, cell.value(), p.forms)
                 : Result<double>::fail(cell.error());
        if (!value || !std::isfinite(value.value())) {
          report.diverged = true;
          report.fail_m = m;
          report.fail_n = n;
          report.max_update_last_sweep = max_update;
          return report;
        }
        max_update = std::max(max_update, std::abs(value.value() - u.at(m, n)));
        u.at(m, n) = value.value();
      }
    }
    ++report.iterations_run;
    report.max_update_last_sweep = max_update;
    double max_interior = 0.0;
    std::size_t arg_m = 0, arg_n = 0;
    for (std::size_t n = 1; n + 1 < N; ++n)
      for (std::size_t m = 1; m + 1 < M; ++m)
        if (std::abs(u.at(m, n)) > max_interior) {
          max_interior = std::abs(u.at(m, n));
          arg_m = m;
          arg_n = n;
        }
    if (max_interior > 1e12) {
      report.diverged = true;
      report.fail_m = arg_m;
      report.fail_n = arg_n;
      return report;
    }
    if (p.tolerance && max_update < *p.tolerance) break;
  }
  return report;
}

}  // namespace invfd
