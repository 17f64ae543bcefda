#pragma once
// Joint moving frames and joint invariants for the three pseudo-group
// actions, plus the continuous differential invariants used as refinement
// targets.  All frames are closed-form solutions of the normalization
// equations; no root-finding happens here.
//
// Index conventions follow the discretized actions: Delta steps columns
// (m), delta steps rows (n), and every frame is anchored at a base (m, n).

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "invfd/common.hpp"
#include "invfd/grid.hpp"

namespace invfd {

// ---------------------------------------------------------------------------
// G1: X = f(x), Y = y, U = u / f_x
//
// Cross-section x_m = 0, u_{m+k,n} = 1.  Solving U_{m+k,n} = 1 for the f
// samples gives the partial sums f_{m+k} = sum_{l<k} u_{m+l,n} Dx_{m+l}.
// ---------------------------------------------------------------------------

class MovingFrameG1 {
 public:
  static Result<MovingFrameG1> at(const RectMesh& mesh, const ScalarField& u,
                                  std::size_t m, std::size_t n) {
    if (u.nx() != mesh.nx() || u.ny() != mesh.ny())
      throw std::invalid_argument("MovingFrameG1: field/mesh size mismatch");
    if (m >= u.nx() || n >= u.ny())
      return Result<MovingFrameG1>::fail("MovingFrameG1: base (" +
                                         std::to_string(m) + "," +
                                         std::to_string(n) + ") out of range");
    MovingFrameG1 frame;
    frame.samples_.push_back(0.0);
    // The frame is a group element, so its f must be increasing: u > 0 on
    // the base row over the sampled columns.
    for (std::size_t c = m; c + 1 < u.nx(); ++c) {
      if (!(u.at(c, n) > 0.0))
        return Result<MovingFrameG1>::fail(
            "MovingFrameG1: needs u > 0 on the base row (column " +
            std::to_string(c) + ")");
      frame.samples_.push_back(frame.samples_.back() +
                               u.at(c, n) * mesh.dx(c));
    }
    return Result<MovingFrameG1>::ok(std::move(frame));
  }

  // f_{m+k}; also equals the normalized invariant iota(x_{m+k}).
  double f_sample(std::size_t k) const { return samples_.at(k); }
  std::size_t sample_count() const { return samples_.size(); }

 private:
  std::vector<double> samples_;
};

// Invariantization targets at a base (m, n): the normalized window
// coordinates and the forward-difference invariants.
enum class G1Symbol {
  IotaX1,   // iota(x_{m+1}) = u_{m,n} Dx_m
  IotaX2,   // iota(x_{m+2}) = u_{m,n} Dx_m + u_{m+1,n} Dx_{m+1}
  IotaU01,  // iota(u_{m,n+1})   = u_{m,n+1} / u_{m,n}
  IotaU11,  // iota(u_{m+1,n+1}) = u_{m+1,n+1} / u_{m+1,n}
  IotaU02,  // iota(u_{m,n+2})   = u_{m,n+2} / u_{m,n}
  I1d,      // iota(Dx_m) = u Dx
  J01d,     // iota(du) = du / u
  I2d,      // iota(D^2 x) = D(u Dx) = u_{m+1,n} Dx_{m+1} - u_{m,n} Dx_m
  J02d,     // iota(d^2 u) = d^2 u / u
  J11d,     // iota(Dd u) = (u Ddu - du Du) / (u_{m+1,n} u_{m,n})
  I01d,     // iota(u_y)  = du / (dy u)
  I02d,     // iota(u_yy) = d^2 u / (dy^2 u)
  I11d      // iota(u_xy) = (u11 u00 - u10 u01) / (u00^2 u10 Dx dy)
};

inline Result<double> invariantize_g1(const RectMesh& mesh, const ScalarField& u,
                                      std::size_t m, std::size_t n,
                                      G1Symbol target) {
  if (u.nx() != mesh.nx() || u.ny() != mesh.ny())
    throw std::invalid_argument("invariantize_g1: field/mesh size mismatch");
  std::size_t need_m = 0, need_n = 0;  // extra columns/rows beyond the base
  switch (target) {
    case G1Symbol::IotaX1:
    case G1Symbol::I1d: need_m = 1; break;
    case G1Symbol::IotaX2:
    case G1Symbol::I2d: need_m = 2; break;
    case G1Symbol::IotaU01:
    case G1Symbol::J01d:
    case G1Symbol::I01d: need_n = 1; break;
    case G1Symbol::IotaU02:
    case G1Symbol::J02d:
    case G1Symbol::I02d: need_n = 2; break;
    case G1Symbol::IotaU11:
    case G1Symbol::J11d:
    case G1Symbol::I11d: need_m = 1; need_n = 1; break;
  }
  if (m + need_m >= u.nx() || n + need_n >= u.ny())
    return Result<double>::fail("invariantize_g1: window exceeds grid at (" +
                                std::to_string(m) + "," + std::to_string(n) +
                                ")");
  const double u00 = u.at(m, n);
  if (u00 == 0.0)
    return Result<double>::fail("invariantize_g1: u vanishes at the base");
  switch (target) {
    case G1Symbol::IotaX1:
    case G1Symbol::I1d:
      return Result<double>::ok(u00 * mesh.dx(m));
    case G1Symbol::IotaX2:
      return Result<double>::ok(u00 * mesh.dx(m) +
                                u.at(m + 1, n) * mesh.dx(m + 1));
    case G1Symbol::IotaU01:
      return Result<double>::ok(u.at(m, n + 1) / u00);
    case G1Symbol::IotaU02:
      return Result<double>::ok(u.at(m, n + 2) / u00);
    case G1Symbol::IotaU11: {
      const double u10 = u.at(m + 1, n);
      if (u10 == 0.0)
        return Result<double>::fail("invariantize_g1: u vanishes at (m+1,n)");
      return Result<double>::ok(u.at(m + 1, n + 1) / u10);
    }
    case G1Symbol::J01d:
      return Result<double>::ok((u.at(m, n + 1) - u00) / u00);
    case G1Symbol::I2d:
      // Exact invariantization of D^2 x: the difference of consecutive
      // I1d values.  Its continuous limit is u_s x_s + u x_ss.
      return Result<double>::ok(u.at(m + 1, n) * mesh.dx(m + 1) -
                                u00 * mesh.dx(m));
    case G1Symbol::J02d:
      return Result<double>::ok(
          (u.at(m, n + 2) - 2.0 * u.at(m, n + 1) + u00) / u00);
    case G1Symbol::J11d: {
      const double u10 = u.at(m + 1, n);
      if (u10 == 0.0)
        return Result<double>::fail("invariantize_g1: u vanishes at (m+1,n)");
      const double du = u.at(m, n + 1) - u00;
      const double Du = u10 - u00;
      const double Ddu = u.at(m + 1, n + 1) - u10 - u.at(m, n + 1) + u00;
      return Result<double>::ok((u00 * Ddu - du * Du) / (u10 * u00));
    }
    case G1Symbol::I01d:
      return Result<double>::ok((u.at(m, n + 1) - u00) / (mesh.dy(n) * u00));
    case G1Symbol::I02d: {
      const double dy = mesh.dy(n);
      return Result<double>::ok(
          (u.at(m, n + 2) - 2.0 * u.at(m, n + 1) + u00) / (dy * dy * u00));
    }
    case G1Symbol::I11d: {
      const double u10 = u.at(m + 1, n);
      if (u10 == 0.0)
        return Result<double>::fail("invariantize_g1: u vanishes at (m+1,n)");
      const double num =
          u.at(m + 1, n + 1) * u00 - u10 * u.at(m, n + 1);
      return Result<double>::ok(num /
                                (u00 * u00 * u10 * mesh.dx(m) * mesh.dy(n)));
    }
  }
  return Result<double>::fail("invariantize_g1: unknown target");
}

// ---------------------------------------------------------------------------
// G2: X = f(x), Y = g(y), U = u / (f_x g_y)
//
// Cross-section x_m = 0, y_n = 0, u_{m+k,n} = u_{m,n+k} = 1 together with
//   Dx dD^2u - D^2x dDu = Dx^3 dy,
// whose solution fixes the g_{n+1} sample (written g* below) and thereby
// the scale of both sample families.
// ---------------------------------------------------------------------------

class MovingFrameG2 {
 public:
  static Result<MovingFrameG2> at(const RectMesh& mesh, const ScalarField& u,
                                  std::size_t m, std::size_t n) {
    if (u.nx() != mesh.nx() || u.ny() != mesh.ny())
      throw std::invalid_argument("MovingFrameG2: field/mesh size mismatch");
    if (m + 2 >= u.nx() || n + 1 >= u.ny())
      return Result<MovingFrameG2>::fail(
          "MovingFrameG2: needs columns m..m+2 and row n+1 at (" +
          std::to_string(m) + "," + std::to_string(n) + ")");
    for (std::size_t k = 0; k <= 2; ++k)
      if (u.at(m + k, n) == 0.0)
        return Result<MovingFrameG2>::fail(
            "MovingFrameG2: u vanishes at (m+" + std::to_string(k) + ",n)");
    // g* from the third cross-section relation: s_k are the row ratios,
    // B_k their scaled first differences, and g* divides by D B.
    const double dx0 = mesh.dx(m), dx1 = mesh.dx(m + 1);
    const double dy0 = mesh.dy(n);
    const double s0 = u.at(m, n + 1) / u.at(m, n);
    const double s1 = u.at(m + 1, n + 1) / u.at(m + 1, n);
    const double s2 = u.at(m + 2, n + 1) / u.at(m + 2, n);
    const double B0 = (s1 - s0) / (u.at(m, n) * dx0);
    const double B1 = (s2 - s1) / (u.at(m + 1, n) * dx1);
    if (B1 - B0 == 0.0)
      return Result<MovingFrameG2>::fail(
          "MovingFrameG2: degenerate data, frame denominator vanishes");
    MovingFrameG2 frame;
    frame.gstar_ = (u.at(m, n + 1) * u.at(m, n) * dx0 * dx0 * dy0 * dy0) /
                   (u.at(m + 1, n) * dx1 * (B1 - B0));
    // f_{m+k} = (dy0/g*) sum_{l<k} u_{m+l,n} Dx_l,
    // g_{n+k} = (g*/(u00 dy0)) sum_{l<k} u_{m,n+l} dy_l.
    frame.f_samples_.push_back(0.0);
    double acc = 0.0;
    for (std::size_t c = m; c + 1 < u.nx(); ++c) {
      acc += u.at(c, n) * mesh.dx(c);
      frame.f_samples_.push_back((dy0 / frame.gstar_) * acc);
    }
    frame.g_samples_.push_back(0.0);
    acc = 0.0;
    for (std::size_t r = n; r + 1 < u.ny(); ++r) {
      acc += u.at(m, r) * mesh.dy(r);
      frame.g_samples_.push_back((frame.gstar_ / (u.at(m, n) * dy0)) * acc);
    }
    return Result<MovingFrameG2>::ok(std::move(frame));
  }

  double gstar() const { return gstar_; }
  double f_sample(std::size_t k) const { return f_samples_.at(k); }
  double g_sample(std::size_t l) const { return g_samples_.at(l); }
  std::size_t f_count() const { return f_samples_.size(); }
  std::size_t g_count() const { return g_samples_.size(); }

 private:
  double gstar_ = 0.0;
  std::vector<double> f_samples_, g_samples_;
};

// Normalized joint invariant iota(u_{m+k,n+l}) = u_{m+k,n+l} u_{m,n} /
// (u_{m+k,n} u_{m,n+l}); the cross-ratio that the frame quotients produce.
inline Result<double> invariantize_u_g2(const ScalarField& u, std::size_t m,
                                        std::size_t n, std::size_t k,
                                        std::size_t l) {
  if (m + k >= u.nx() || n + l >= u.ny())
    return Result<double>::fail("invariantize_u_g2: window exceeds grid");
  const double den = u.at(m + k, n) * u.at(m, n + l);
  if (den == 0.0)
    return Result<double>::fail("invariantize_u_g2: u vanishes on the base row/column");
  return Result<double>::ok(u.at(m + k, n + l) * u.at(m, n) / den);
}

// iota(u_xy) for the G2 action on a 2x2 corner block:
//   (u11 u00 - u10 u01) / (u00 u10 u01 h k).
inline Result<double> invariant_I11d_g2(const StencilCell& cell) {
  const double u00 = cell.w[0][0], u10 = cell.w[1][0];
  const double u01 = cell.w[0][1], u11 = cell.w[1][1];
  if (!(cell.h > 0.0) || !(cell.k > 0.0))
    return Result<double>::fail("invariant_I11d_g2: needs positive steps");
  if (u00 == 0.0 || u10 == 0.0 || u01 == 0.0)
    return Result<double>::fail("invariant_I11d_g2: zero denominator entry");
  return Result<double>::ok((u11 * u00 - u10 * u01) /
                            (u00 * u10 * u01 * cell.h * cell.k));
}

// The naive quotient approximation of I11 on the same block,
//   F = (u11 u00 - u10 u01) / (u00^3 h k),
// which is NOT invariant under the discretized G2 action; invariantizing it
// yields invariant_I11d_g2.  Kept as the control in invariance suites.
inline Result<double> naive_I11_approximation(const StencilCell& cell) {
  const double u00 = cell.w[0][0];
  if (!(cell.h > 0.0) || !(cell.k > 0.0))
    return Result<double>::fail("naive_I11_approximation: needs positive steps");
  if (u00 == 0.0)
    return Result<double>::fail("naive_I11_approximation: u vanishes at the base");
  return Result<double>::ok((cell.w[1][1] * u00 - cell.w[1][0] * cell.w[0][1]) /
                            (u00 * u00 * u00 * cell.h * cell.k));
}

// ---------------------------------------------------------------------------
// G3 (Vessiot): X = f(x), Y = y f_x + g(x), U = u + (y f_xx + g_x)/f_x
//
// Cross-section X = Y = U = U_X = U_Y = U_XY = 0, U_YY = 1.  Solving the
// normalization equations exactly gives the forward quotients below; the
// frame then consists of the f samples at m..m+3 and shift samples at
// m..m+2 recovered from the e samples via g_k = e_k - y_{m+k,n} F_k.
// ---------------------------------------------------------------------------

struct G3FrameQuotients {
  double F0, E0, F1, E1, F2;  // Df_{m+k}/Dx_{m+k} and De_{m+k}/Dx_{m+k}
  double uyy;                 // discrete u_yy at the base, d^2u / a_m^2
};

class MovingFrameG3 {
 public:
  static Result<MovingFrameG3> at(const GeneralMesh& mesh, const ScalarField& u,
                                  std::size_t m, std::size_t n) {
    if (u.nx() != mesh.nx())
      throw std::invalid_argument("MovingFrameG3: field/mesh size mismatch");
    if (m + 3 >= u.nx() || n + 2 >= u.ny())
      return Result<MovingFrameG3>::fail(
          "MovingFrameG3: needs columns m..m+3 and rows n..n+2 at (" +
          std::to_string(m) + "," + std::to_string(n) + ")");
    const double dx0 = mesh.dx(m), dx1 = mesh.dx(m + 1), dx2 = mesh.dx(m + 2);
    const double a0 = mesh.slope(m);
    const double d2u = u.at(m, n + 2) - 2.0 * u.at(m, n + 1) + u.at(m, n);
    const double uyy = d2u / (a0 * a0);
    if (!(uyy > 0.0))
      return Result<MovingFrameG3>::fail(
          "MovingFrameG3: outside chart, cross-section needs u_yy > 0");
    const double du0 = u.at(m, n + 1) - u.at(m, n);
    const double du1 = u.at(m + 1, n + 1) - u.at(m + 1, n);
    const double Dy0 = mesh.y(m + 1, n) - mesh.y(m, n);
    const double Dy1 = mesh.y(m + 2, n) - mesh.y(m + 1, n);
    MovingFrameG3 frame;
    G3FrameQuotients& q = frame.q_;
    q.uyy = uyy;
    q.F0 = std::sqrt(uyy);
    q.E0 = q.F0 * (Dy0 / dx0 - u.at(m, n));
    // The next two solve U_Y = 0 and U_XY = 0 exactly; the brackets divide
    // by the vertical steps a_{m+1}, a_{m+2} of the neighbouring columns.
    q.F1 = q.F0 * (1.0 - dx0 * du0 / mesh.slope(m + 1));
    q.E1 = q.F1 * (Dy1 / dx1 - u.at(m + 1, n));
    const double T = a0 * (Dy0 - dx0 * u.at(m, n)) * uyy;
    q.F2 = q.F1 * (1.0 + (dx1 / mesh.slope(m + 2)) * (T - du1));
    // Accumulate samples: f anchored at 0, e anchored at 0, g from e.
    frame.fs_ = {0.0, q.F0 * dx0, 0.0, 0.0};
    frame.fs_[2] = frame.fs_[1] + q.F1 * dx1;
    frame.fs_[3] = frame.fs_[2] + q.F2 * dx2;
    const double es0 = 0.0, es1 = q.E0 * dx0, es2 = es1 + q.E1 * dx1;
    frame.gs_ = {es0 - mesh.y(m, n) * q.F0, es1 - mesh.y(m + 1, n) * q.F1,
                 es2 - mesh.y(m + 2, n) * q.F2};
    return Result<MovingFrameG3>::ok(std::move(frame));
  }

  const G3FrameQuotients& quotients() const { return q_; }
  double f_sample(std::size_t k) const { return fs_.at(k); }  // k <= 3
  double g_sample(std::size_t k) const { return gs_.at(k); }  // k <= 2

 private:
  G3FrameQuotients q_{};
  std::vector<double> fs_, gs_;
};

struct G3NormalizedJet {
  double X, Y, U, UX, UY, UXY, UYY;
};

// Apply the frame's own samples through the discretized action and read the
// transformed jet at the base.  The cross-section demands
// X = Y = U = UX = UY = UXY = 0 and UYY = 1.  Raw arrays are used because
// the frame's column quotients may be negative (it is a normalization
// device, not an orientation-preserving mesh map).
inline Result<G3NormalizedJet> frame_normalized_jet_g3(const GeneralMesh& mesh,
                                                       const ScalarField& u,
                                                       std::size_t m,
                                                       std::size_t n) {
  const auto frame = MovingFrameG3::at(mesh, u, m, n);
  if (!frame) return Result<G3NormalizedJet>::fail(frame.error());
  const G3FrameQuotients& q = frame.value().quotients();
  const double Fq[3] = {q.F0, q.F1, q.F2};
  const auto gs = [&](std::size_t k) { return frame.value().g_sample(k); };
  const auto fs = [&](std::size_t k) { return frame.value().f_sample(k); };
  // e_{m+i,r} = y_{m+i,r} F_i + g_i; U_{m+i,r} = u + De/Df - Dy/Dx.
  const auto e = [&](std::size_t i, std::size_t r) {
    return mesh.y(m + i, r) * Fq[i] + gs(i);
  };
  const auto U = [&](std::size_t i, std::size_t r) {
    return u.at(m + i, r) + (e(i + 1, r) - e(i, r)) / (fs(i + 1) - fs(i)) -
           (mesh.y(m + i + 1, r) - mesh.y(m + i, r)) / mesh.dx(m + i);
  };
  G3NormalizedJet jet;
  jet.X = fs(0);
  jet.Y = e(0, n);
  jet.U = U(0, n);
  // Discrete derivatives of the transformed data; transformed columns keep
  // the affine-in-n structure with slope a_{m+i} F_i and offset b F_i + g_i.
  const double Dx = fs(1) - fs(0);
  const double dy = mesh.slope(m) * q.F0;
  const double Dy = e(1, n) - e(0, n);
  const double Ddy = mesh.slope(m + 1) * q.F1 - mesh.slope(m) * q.F0;
  const double du = U(0, n + 1) - U(0, n);
  const double Du = U(1, n) - U(0, n);
  const double Ddu = U(1, n + 1) - U(1, n) - U(0, n + 1) + U(0, n);
  const double d2u = U(0, n + 2) - 2.0 * U(0, n + 1) + U(0, n);
  jet.UX = (dy * Du - Dy * du) / (Dx * dy);
  jet.UY = du / dy;
  jet.UXY = (dy * Ddu - Ddy * Du - Dy * d2u) / (Dx * dy * dy);
  jet.UYY = d2u / (dy * dy);
  return Result<G3NormalizedJet>::ok(jet);
}

struct G3Invariants {
  double I03d;              // iota(u_yyy) = u_yyy / u_yy^{3/2}
  double I12d;              // iota(u_xyy) = (u_xyy + u u_yyy + 2 u_y u_yy) / u_yy^{3/2}
  double iota_dx;           // Dx sqrt(u_yy)
  double iota_dy_forward;   // (Dy - u Dx) sqrt(u_yy)
  double iota_dy_vertical;  // dy sqrt(u_yy)
};

inline Result<G3Invariants> invariants_g3(const GeneralMesh& mesh,
                                          const ScalarField& u, std::size_t m,
                                          std::size_t n) {
  const auto d = discrete_derivatives_general(u, mesh, m, n);
  if (!d) return Result<G3Invariants>::fail(d.error());
  if (!(d.value().uyy > 0.0))
    return Result<G3Invariants>::fail(
        "invariants_g3: outside chart, cross-section needs u_yy > 0");
  const double root = std::sqrt(d.value().uyy);
  const double pow32 = d.value().uyy * root;
  G3Invariants inv;
  inv.I03d = d.value().uyyy / pow32;
  inv.I12d = (d.value().uxyy + u.at(m, n) * d.value().uyyy +
              2.0 * d.value().uy * d.value().uyy) /
             pow32;
  const double Dx = mesh.dx(m);
  const double Dy = mesh.y(m + 1, n) - mesh.y(m, n);
  inv.iota_dx = Dx * root;
  inv.iota_dy_forward = (Dy - u.at(m, n) * Dx) * root;
  inv.iota_dy_vertical = mesh.slope(m) * root;
  return Result<G3Invariants>::ok(inv);
}

// ---------------------------------------------------------------------------
// Continuous differential invariants (refinement targets).
// ---------------------------------------------------------------------------

// I11 = (u u_xy - u_x u_y) / u^3, the differential invariant whose level set
// I11 = 1 is the model equation.
inline Result<double> continuous_invariant_I11(double u, double ux, double uy,
                                               double uxy) {
  if (u == 0.0)
    return Result<double>::fail("continuous_invariant_I11: u vanishes");
  return Result<double>::ok((u * uxy - ux * uy) / (u * u * u));
}

// Jet of (x(s), u(s,t)) in computational variables at one point.
struct G1ContinuousJet {
  double u, us, ut, ust, utt, xs, xss;
};

struct G1ContinuousInvariants {
  double I1;   // u x_s
  double I2;   // u_s x_s + u x_ss
  double J01;  // u_t / u
  double J02;  // u_tt / u
  double J11;  // (u u_st - u_t u_s) / u^2
};

inline Result<G1ContinuousInvariants> continuous_normalized_invariants_g1(
    const G1ContinuousJet& jet) {
  if (jet.u == 0.0)
    return Result<G1ContinuousInvariants>::fail(
        "continuous_normalized_invariants_g1: u vanishes");
  G1ContinuousInvariants inv;
  inv.I1 = jet.u * jet.xs;
  inv.I2 = jet.us * jet.xs + jet.u * jet.xss;
  inv.J01 = jet.ut / jet.u;
  inv.J02 = jet.utt / jet.u;
  inv.J11 = (jet.u * jet.ust - jet.ut * jet.us) / (jet.u * jet.u);
  return Result<G1ContinuousInvariants>::ok(inv);
}

}  // namespace invfd
