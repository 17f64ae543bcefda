#pragma once
// Finite difference schemes for the model PDE (u u_xy - u_x u_y)/u^3 = 1:
// the invariant discretization built from the joint invariant I11d and the
// standard quotient discretization, their residuals, the four solved corner
// forms, and the nine-point averaged update used by BVP relaxation.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "invfd/common.hpp"
#include "invfd/frames.hpp"
#include "invfd/grid.hpp"

namespace invfd {

enum class SchemeKind { Standard, Invariant };

// Which of the four cells containing the center of a 3x3 window is solved
// for the center value.  BottomLeft is the cell anchored at w[0][0].
enum class CellCorner { BottomLeft, BottomRight, TopLeft, TopRight };

// How many corner forms the nine-point update averages.  Three uses the
// bottom-left, bottom-right, and top-left cells only; Four adds the
// top-right cell so every cell containing the center participates.
enum class FormsMode { Three, Four };

// Scheme residual on one cell (the 2x2 corner block of `cell`):
//   Invariant: (u11 u00 - u10 u01)/(u00 u10 u01 h k) - 1,
//   Standard:  (u11 u00 - u10 u01)/(u00^3 h k) - 1.
// Both vanish on solutions of the discretized model equation.
inline Result<double> residual(SchemeKind kind, const StencilCell& cell) {
  const Result<double> approx = kind == SchemeKind::Invariant
                                    ? invariant_I11d_g2(cell)
                                    : naive_I11_approximation(cell);
  if (!approx) return approx;
  return Result<double>::ok(approx.value() - 1.0);
}

// Descriptor for one solved corner form.  `linear_in_center` records whether
// the center unknown enters its cell equation linearly; only the standard
// scheme's top-right cell is cubic and needs a nonlinear solve.
struct SolvedForm {
  CellCorner which;
  bool linear_in_center;
};

inline std::array<SolvedForm, 4> solved_forms(SchemeKind kind) {
  return {SolvedForm{CellCorner::BottomLeft, true},
          SolvedForm{CellCorner::BottomRight, true},
          SolvedForm{CellCorner::TopLeft, true},
          SolvedForm{CellCorner::TopRight, kind == SchemeKind::Invariant}};
}

// Solve the cell equation of the chosen corner cell for the center value of
// a full 3x3 window.  The window's center entry w[1][1] doubles as the
// current value and seeds the one nonlinear (standard top-right) form.
inline Result<double> solve_corner(SchemeKind kind, CellCorner which,
                                   const StencilCell& cell) {
  if (cell.extent != 3)
    throw std::invalid_argument("solve_corner: needs a full 3x3 window");
  if (!(cell.h > 0.0) || !(cell.k > 0.0))
    return Result<double>::fail("solve_corner: needs positive steps");
  const double hk = cell.h * cell.k;
  const auto& w = cell.w;
  if (kind == SchemeKind::Invariant) {
    switch (which) {
      case CellCorner::BottomLeft: {
        if (w[0][0] == 0.0)
          return Result<double>::fail("solve_corner: zero pivot u_{m,n}");
        return Result<double>::ok(w[1][0] * w[0][1] * (1.0 / w[0][0] + hk));
      }
      case CellCorner::BottomRight: {
        const double pivot = w[2][0] * (1.0 + hk * w[1][0]);
        if (pivot == 0.0)
          return Result<double>::fail("solve_corner: zero pivot in bottom-right cell");
        return Result<double>::ok(w[2][1] * w[1][0] / pivot);
      }
      case CellCorner::TopLeft: {
        const double pivot = w[0][2] * (1.0 + hk * w[0][1]);
        if (pivot == 0.0)
          return Result<double>::fail("solve_corner: zero pivot in top-left cell");
        return Result<double>::ok(w[1][2] * w[0][1] / pivot);
      }
      case CellCorner::TopRight: {
        const double pivot = w[2][2] - hk * w[2][1] * w[1][2];
        if (pivot == 0.0)
          return Result<double>::fail("solve_corner: zero pivot in top-right cell");
        return Result<double>::ok(w[2][1] * w[1][2] / pivot);
      }
    }
  } else {
    switch (which) {
      case CellCorner::BottomLeft: {
        if (w[0][0] == 0.0)
          return Result<double>::fail("solve_corner: zero pivot u_{m,n}");
        return Result<double>::ok(
            (w[0][0] * w[0][0] * w[0][0] * hk + w[1][0] * w[0][1]) / w[0][0]);
      }
      case CellCorner::BottomRight: {
        if (w[2][0] == 0.0)
          return Result<double>::fail("solve_corner: zero pivot u_{m+2,n}");
        return Result<double>::ok(
            (w[2][1] * w[1][0] - w[1][0] * w[1][0] * w[1][0] * hk) / w[2][0]);
      }
      case CellCorner::TopLeft: {
        if (w[0][2] == 0.0)
          return Result<double>::fail("solve_corner: zero pivot u_{m,n+2}");
        return Result<double>::ok(
            (w[1][2] * w[0][1] - w[0][1] * w[0][1] * w[0][1] * hk) / w[0][2]);
      }
      case CellCorner::TopRight: {
        // The center enters its own cell cubically:
        //   hk c^3 - u_{m+2,n+2} c + u_{m+2,n+1} u_{m+1,n+2} = 0.
        const double a = w[2][2], b = w[2][1] * w[1][2];
        return newton_scalar([&](double c) { return hk * c * c * c - a * c + b; },
                             [&](double c) { return 3.0 * hk * c * c - a; },
                             w[1][1], 1e-12, 50);
      }
    }
  }
  return Result<double>::fail("solve_corner: unknown corner");
}

// Averaged update for one interior point: the mean of the solved corner
// forms over the cells selected by `mode`.  Any corner failure fails the
// whole update (the relaxation marks the run diverged).
inline Result<double> nine_point_update(SchemeKind kind, const StencilCell& cell,
                                        FormsMode mode = FormsMode::Four) {
  const std::size_t count = mode == FormsMode::Four ? 4 : 3;
  const std::array<CellCorner, 4> corners = {
      CellCorner::BottomLeft, CellCorner::BottomRight, CellCorner::TopLeft,
      CellCorner::TopRight};
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto v = solve_corner(kind, corners[i], cell);
    if (!v) return v;
    sum += v.value();
  }
  return Result<double>::ok(sum / static_cast<double>(count));
}

}  // namespace invfd
