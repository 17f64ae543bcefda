#pragma once
// Meshes, scalar fields, and forward-difference derivative stencils.
//
// Two mesh families are supported: tensor-product rectangular meshes
// (x_m, y_n) and "sheared" general meshes whose rows are straight lines
// y_{m,n} = n a_m + b_m over strictly increasing x_m.  All derivative
// approximations are built from forward differences:
//   Delta f_{m,n} = f_{m+1,n} - f_{m,n}   (column direction)
//   delta f_{m,n} = f_{m,n+1} - f_{m,n}   (row direction)

#include <array>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "invfd/common.hpp"

namespace invfd {

class RectMesh {
 public:
  RectMesh(std::vector<double> xs, std::vector<double> ys)
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    require_increasing(xs_, "RectMesh x");
    require_increasing(ys_, "RectMesh y");
  }

  static RectMesh uniform(double x0, double h, std::size_t nx, double y0,
                          double k, std::size_t ny) {
    if (h <= 0.0 || k <= 0.0)
      throw std::invalid_argument("RectMesh::uniform: spacings must be positive");
    std::vector<double> xs(nx), ys(ny);
    for (std::size_t m = 0; m < nx; ++m) xs[m] = x0 + h * static_cast<double>(m);
    for (std::size_t n = 0; n < ny; ++n) ys[n] = y0 + k * static_cast<double>(n);
    return RectMesh(std::move(xs), std::move(ys));
  }

  std::size_t nx() const { return xs_.size(); }
  std::size_t ny() const { return ys_.size(); }
  double x(std::size_t m) const { return xs_[m]; }
  double y(std::size_t n) const { return ys_[n]; }
  double dx(std::size_t m) const { return xs_[m + 1] - xs_[m]; }
  double dy(std::size_t n) const { return ys_[n + 1] - ys_[n]; }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }

 private:
  static void require_increasing(const std::vector<double>& v, const char* what) {
    if (v.size() < 2)
      throw std::invalid_argument(std::string(what) + ": need at least two samples");
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
      if (!(v[i] < v[i + 1]))
        throw std::invalid_argument(std::string(what) +
                                    ": coordinates must be strictly increasing");
  }

  std::vector<double> xs_, ys_;
};

// Rows are straight lines in y: the point (m, n) sits at (x_m, n a_m + b_m).
// Row spacing a_m must be positive so each column is ordered bottom to top.
class GeneralMesh {
 public:
  GeneralMesh(std::vector<double> xs, std::vector<double> slope,
              std::vector<double> offset)
      : xs_(std::move(xs)), a_(std::move(slope)), b_(std::move(offset)) {
    if (xs_.size() < 2)
      throw std::invalid_argument("GeneralMesh: need at least two columns");
    for (std::size_t m = 0; m + 1 < xs_.size(); ++m)
      if (!(xs_[m] < xs_[m + 1]))
        throw std::invalid_argument("GeneralMesh: x must be strictly increasing");
    if (a_.size() != xs_.size() || b_.size() != xs_.size())
      throw std::invalid_argument("GeneralMesh: slope/offset size mismatch");
    for (double a : a_)
      if (!(a > 0.0))
        throw std::invalid_argument("GeneralMesh: row spacing must be positive");
  }

  std::size_t nx() const { return xs_.size(); }
  double x(std::size_t m) const { return xs_[m]; }
  double dx(std::size_t m) const { return xs_[m + 1] - xs_[m]; }
  double slope(std::size_t m) const { return a_[m]; }   // a_m = delta y on column m
  double offset(std::size_t m) const { return b_[m]; }  // b_m = y at row 0
  double y(std::size_t m, std::size_t n) const {
    return static_cast<double>(n) * a_[m] + b_[m];
  }
  const std::vector<double>& xs() const { return xs_; }

 private:
  std::vector<double> xs_, a_, b_;
};

class ScalarField {
 public:
  ScalarField(std::size_t nx, std::size_t ny, double value = 0.0)
      : nx_(nx), ny_(ny), values_(nx * ny, value) {
    if (nx == 0 || ny == 0)
      throw std::invalid_argument("ScalarField: dimensions must be nonzero");
  }

  static ScalarField sample(const RectMesh& mesh,
                            const std::function<double(double, double)>& f) {
    ScalarField u(mesh.nx(), mesh.ny());
    for (std::size_t m = 0; m < mesh.nx(); ++m)
      for (std::size_t n = 0; n < mesh.ny(); ++n)
        u.at(m, n) = f(mesh.x(m), mesh.y(n));
    return u;
  }

  static ScalarField sample(const GeneralMesh& mesh, std::size_t ny,
                            const std::function<double(double, double)>& f) {
    ScalarField u(mesh.nx(), ny);
    for (std::size_t m = 0; m < mesh.nx(); ++m)
      for (std::size_t n = 0; n < ny; ++n)
        u.at(m, n) = f(mesh.x(m), mesh.y(m, n));
    return u;
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double at(std::size_t m, std::size_t n) const { return values_[m * ny_ + n]; }
  double& at(std::size_t m, std::size_t n) { return values_[m * ny_ + n]; }

  bool diverged() const { return diverged_; }
  void mark_diverged() { diverged_ = true; }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::size_t nx_, ny_;
  std::vector<double> values_;
  bool diverged_ = false;
};

// One scheme stencil: w[i][j] = u_{m+i, n+j}.  extent 2 uses the 2x2 corner
// block (residual evaluation); extent 3 is the full nine-point window.
struct StencilCell {
  std::array<std::array<double, 3>, 3> w{};
  int extent = 2;
  double h = 0.0;
  double k = 0.0;
};

inline Result<StencilCell> cell_from_field(const ScalarField& u,
                                           const RectMesh& mesh, std::size_t m,
                                           std::size_t n, int extent = 2) {
  if (u.nx() != mesh.nx() || u.ny() != mesh.ny())
    throw std::invalid_argument("cell_from_field: field/mesh size mismatch");
  if (extent != 2 && extent != 3)
    throw std::invalid_argument("cell_from_field: extent must be 2 or 3");
  const std::size_t span = static_cast<std::size_t>(extent) - 1;
  if (m + span >= u.nx() || n + span >= u.ny())
    return Result<StencilCell>::fail("cell_from_field: window exceeds grid at (" +
                                     std::to_string(m) + "," + std::to_string(n) +
                                     ")");
  StencilCell cell;
  cell.extent = extent;
  cell.h = mesh.dx(m);
  cell.k = mesh.dy(n);
  for (std::size_t i = 0; i <= span; ++i)
    for (std::size_t j = 0; j <= span; ++j)
      cell.w[i][j] = u.at(m + i, n + j);
  return Result<StencilCell>::ok(cell);
}

inline Result<double> forward_dx(const ScalarField& u, std::size_t m,
                                 std::size_t n) {
  if (m + 1 >= u.nx())
    return Result<double>::fail("forward_dx: column " + std::to_string(m + 1) +
                                " out of range (nx=" + std::to_string(u.nx()) + ")");
  if (n >= u.ny())
    return Result<double>::fail("forward_dx: row " + std::to_string(n) +
                                " out of range (ny=" + std::to_string(u.ny()) + ")");
  return Result<double>::ok(u.at(m + 1, n) - u.at(m, n));
}

inline Result<double> forward_dy(const ScalarField& u, std::size_t m,
                                 std::size_t n) {
  if (m >= u.nx())
    return Result<double>::fail("forward_dy: column " + std::to_string(m) +
                                " out of range (nx=" + std::to_string(u.nx()) + ")");
  if (n + 1 >= u.ny())
    return Result<double>::fail("forward_dy: row " + std::to_string(n + 1) +
                                " out of range (ny=" + std::to_string(u.ny()) + ")");
  return Result<double>::ok(u.at(m, n + 1) - u.at(m, n));
}

struct RectDerivatives {
  double ux, uy, uxy, uyy;
};

// First-order quotients on a rectangular mesh:
//   u_x ~ Delta u / Delta x,          u_y ~ delta u / delta y,
//   u_xy ~ Delta delta u / (Delta x delta y),   u_yy ~ delta^2 u / (delta y)^2.
inline Result<RectDerivatives> discrete_derivatives_rect(const ScalarField& u,
                                                         const RectMesh& mesh,
                                                         std::size_t m,
                                                         std::size_t n) {
  if (u.nx() != mesh.nx() || u.ny() != mesh.ny())
    throw std::invalid_argument("discrete_derivatives_rect: field/mesh size mismatch");
  if (m + 1 >= u.nx())
    return Result<RectDerivatives>::fail(
        "discrete_derivatives_rect: needs column " + std::to_string(m + 1) +
        " (nx=" + std::to_string(u.nx()) + ")");
  if (n + 2 >= u.ny())
    return Result<RectDerivatives>::fail(
        "discrete_derivatives_rect: needs row " + std::to_string(n + 2) +
        " (ny=" + std::to_string(u.ny()) + ")");
  const double dx = mesh.dx(m);
  const double dy = mesh.dy(n);
  const double du = u.at(m, n + 1) - u.at(m, n);
  const double Du = u.at(m + 1, n) - u.at(m, n);
  const double Ddu = u.at(m + 1, n + 1) - u.at(m + 1, n) - u.at(m, n + 1) + u.at(m, n);
  const double d2u = u.at(m, n + 2) - 2.0 * u.at(m, n + 1) + u.at(m, n);
  RectDerivatives d;
  d.ux = Du / dx;
  d.uy = du / dy;
  d.uxy = Ddu / (dx * dy);
  d.uyy = d2u / (dy * dy);
  return Result<RectDerivatives>::ok(d);
}

struct GeneralDerivatives {
  double ux, uy, uxy, uyy, uyyy, uxyy;
};

// First-order quotients on a general mesh.  The x-direction formulas carry
// correction terms because moving one column also shifts y:
//   u_x  ~ (dy Du - Dy du) / (Dx dy)
//   u_xy ~ (dy Ddu - Ddy Du - Dy d2u) / (Dx dy^2)
//   u_xyy ~ (dy Dd2u - 2 d2u Ddy - Dy d3u) / (Dx dy^3)
// with Dx = x_{m+1}-x_m, dy = a_m, Dy = y_{m+1,n}-y_{m,n}, Ddy = a_{m+1}-a_m.
inline Result<GeneralDerivatives> discrete_derivatives_general(
    const ScalarField& u, const GeneralMesh& mesh, std::size_t m, std::size_t n) {
  if (u.nx() != mesh.nx())
    throw std::invalid_argument(
        "discrete_derivatives_general: field/mesh size mismatch");
  if (m + 1 >= u.nx())
    return Result<GeneralDerivatives>::fail(
        "discrete_derivatives_general: needs column " + std::to_string(m + 1) +
        " (nx=" + std::to_string(u.nx()) + ")");
  if (n + 3 >= u.ny())
    return Result<GeneralDerivatives>::fail(
        "discrete_derivatives_general: needs row " + std::to_string(n + 3) +
        " (ny=" + std::to_string(u.ny()) + ")");
  const double Dx = mesh.dx(m);
  const double dy = mesh.slope(m);
  const double Dy = mesh.y(m + 1, n) - mesh.y(m, n);
  const double Ddy = mesh.slope(m + 1) - mesh.slope(m);
  const double du = u.at(m, n + 1) - u.at(m, n);
  const double Du = u.at(m + 1, n) - u.at(m, n);
  const double Ddu = u.at(m + 1, n + 1) - u.at(m + 1, n) - u.at(m, n + 1) + u.at(m, n);
  const double d2u = u.at(m, n + 2) - 2.0 * u.at(m, n + 1) + u.at(m, n);
  const double d3u = u.at(m, n + 3) - 3.0 * u.at(m, n + 2) + 3.0 * u.at(m, n + 1) -
                     u.at(m, n);
  const double Dd2u = (u.at(m + 1, n + 2) - 2.0 * u.at(m + 1, n + 1) + u.at(m + 1, n)) -
                      d2u;
  GeneralDerivatives d;
  d.ux = (dy * Du - Dy * du) / (Dx * dy);
  d.uy = du / dy;
  d.uxy = (dy * Ddu - Ddy * Du - Dy * d2u) / (Dx * dy * dy);
  d.uyy = d2u / (dy * dy);
  d.uyyy = d3u / (dy * dy * dy);
  d.uxyy = (dy * Dd2u - 2.0 * d2u * Ddy - Dy * d3u) / (Dx * dy * dy * dy);
  return Result<GeneralDerivatives>::ok(d);
}

}  // namespace invfd
