#pragma once
// Benchmark layer: exact solutions of (u u_xy - u_x u_y)/u^3 = 1, drivers for
// the two error tables, invariance and convergence suites, and CSV output.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invfd/common.hpp"
#include "invfd/frames.hpp"
#include "invfd/grid.hpp"
#include "invfd/pseudogroup.hpp"
#include "invfd/schemes.hpp"
#include "invfd/solve.hpp"

namespace invfd {

// ---------------------------------------------------------------------------
// Exact solutions.  All three are functions of s = x + y solving the model
// PDE exactly; each carries its analytic partials so convergence studies can
// compare against closed forms.

enum class SolutionKind { Rational, Secant, Exponential };

inline const char* solution_name(SolutionKind kind) {
  switch (kind) {
    case SolutionKind::Rational: return "rational";
    case SolutionKind::Secant: return "secant";
    case SolutionKind::Exponential: return "exponential";
  }
  return "?";
}

class ExactSolution {
 public:
  // The constructor probes |I11 - 1| on a 10x10 grid over [1,2]^2 (clear of
  // every singular line) and refuses to hand out a non-solution.
  explicit ExactSolution(SolutionKind kind) : kind_(kind) {
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        const double x = 1.0 + static_cast<double>(i) / 9.0;
        const double y = 1.0 + static_cast<double>(j) / 9.0;
        const auto i11 = continuous_invariant_I11(u(x, y), ux(x, y), uy(x, y),
                                                  uxy(x, y));
        if (!i11 || std::abs(i11.value() - 1.0) > 1e-10)
          throw std::logic_error("ExactSolution: PDE probe failed");
      }
  }

  SolutionKind kind() const { return kind_; }
  const char* name() const { return solution_name(kind_); }

  double u(double x, double y) const {
    const double s = x + y;
    switch (kind_) {
      case SolutionKind::Rational: return 2.0 / (s * s);
      case SolutionKind::Secant: {
        const double c = std::cos(s);
        return 2.0 / (c * c);
      }
      case SolutionKind::Exponential: {
        const double w = std::exp(s);
        return 2.0 * w / ((w - 1.0) * (w - 1.0));
      }
    }
    return 0.0;
  }

  // The solution depends on x + y only, so u_x = u_y.
  double ux(double x, double y) const {
    const double s = x + y;
    switch (kind_) {
      case SolutionKind::Rational: return -4.0 / (s * s * s);
      case SolutionKind::Secant: {
        const double c = std::cos(s);
        return 4.0 * std::sin(s) / (c * c * c);
      }
      case SolutionKind::Exponential: {
        const double w = std::exp(s);
        const double d = w - 1.0;
        return -2.0 * w * (w + 1.0) / (d * d * d);
      }
    }
    return 0.0;
  }

  double uy(double x, double y) const { return ux(x, y); }

  double uxy(double x, double y) const {
    const double s = x + y;
    switch (kind_) {
      case SolutionKind::Rational: return 12.0 / (s * s * s * s);
      case SolutionKind::Secant: {
        const double c = std::cos(s);
        const double sn = std::sin(s);
        return 4.0 * (c * c + 3.0 * sn * sn) / (c * c * c * c);
      }
      case SolutionKind::Exponential: {
        const double w = std::exp(s);
        const double d = w - 1.0;
        return 2.0 * w * (w * w + 4.0 * w + 1.0) / (d * d * d * d);
      }
    }
    return 0.0;
  }

  // True when no singular line s = const of the solution meets [s_lo, s_hi].
  bool domain_clear(double s_lo, double s_hi) const {
    if (kind_ == SolutionKind::Secant) {
      const double pi = 3.14159265358979323846;
      const double j0 = std::ceil((s_lo - pi / 2.0) / pi);
      return pi / 2.0 + j0 * pi > s_hi;
    }
    return s_lo > 0.0 || s_hi < 0.0;  // pole at s = 0
  }

 private:
  SolutionKind kind_;
};

// ---------------------------------------------------------------------------
// Experiment plumbing.

inline const char* scheme_name(SchemeKind kind) {
  return kind == SchemeKind::Standard ? "standard" : "invariant";
}

struct ExperimentConfig {
  SolutionKind solution = SolutionKind::Secant;
  double x0 = 1.0, y0 = 1.0;       // bottom-left domain corner
  double width = 1.0, height = 1.0;
  double h = 0.1, k = 0.1;
  SchemeKind kind = SchemeKind::Invariant;
  int iterations = 100;
  std::uint64_t seed = 0;
  FormsMode forms = FormsMode::Four;
  bool allow_singular = false;  // permit singularity-approach domains
};

struct ErrorReport {
  double mean_abs = 0.0;           // |u - exact| averaged over all grid nodes
  double mean_abs_interior = 0.0;  // the same with the exact boundary excluded
  double max_abs = 0.0;
  bool diverged = false;
  long long runtime_ms = 0;
};

// Full artifacts of one run, for dumps and plotting.
struct ExperimentRun {
  RectMesh mesh;
  ScalarField field;
  ScalarField exact;
  ErrorReport report;
};

namespace detail {

inline ErrorReport measure_errors(const ScalarField& u, const ScalarField& exact,
                                  bool diverged, long long ms) {
  ErrorReport r;
  r.diverged = diverged;
  r.runtime_ms = ms;
  if (diverged) {
    const double inf = std::numeric_limits<double>::infinity();
    r.mean_abs = r.mean_abs_interior = r.max_abs = inf;
    return r;
  }
  const std::size_t M = u.nx(), N = u.ny();
  double sum = 0.0, sum_int = 0.0, worst = 0.0;
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t n = 0; n < N; ++n) {
      const double e = std::abs(u.at(m, n) - exact.at(m, n));
      sum += e;
      worst = std::max(worst, e);
      if (m > 0 && m + 1 < M && n > 0 && n + 1 < N) sum_int += e;
    }
  r.mean_abs = sum / static_cast<double>(M * N);
  r.mean_abs_interior = sum_int / static_cast<double>((M - 2) * (N - 2));
  r.max_abs = worst;
  return r;
}

inline Result<RectMesh> config_mesh(const ExperimentConfig& c,
                                    std::size_t min_side) {
  if (!(c.h > 0.0) || !(c.k > 0.0))
    return Result<RectMesh>::fail("experiment: steps must be positive");
  if (c.iterations < 0)
    return Result<RectMesh>::fail("experiment: iterations must be >= 0");
  const ExactSolution sol(c.solution);
  if (!c.allow_singular &&
      !sol.domain_clear(c.x0 + c.y0, c.x0 + c.width + c.y0 + c.height))
    return Result<RectMesh>::fail(
        "experiment: domain crosses a singular line of the exact solution "
        "(pass the singularity-approach flag to force it)");
  const std::size_t M = static_cast<std::size_t>(std::lround(c.width / c.h)) + 1;
  const std::size_t N = static_cast<std::size_t>(std::lround(c.height / c.k)) + 1;
  if (M < min_side || N < min_side)
    return Result<RectMesh>::fail("experiment: grid needs at least " +
                                  std::to_string(min_side) + " nodes per side");
  return Result<RectMesh>::ok(RectMesh::uniform(c.x0, c.h, M, c.y0, c.k, N));
}

}  // namespace detail

// Boundary-value run: boundary from the exact solution, four-corner
// initialization, `iterations` relaxation sweeps.  A non-finite
// initialization already counts as divergence; no relaxation is attempted on
// top of it.
inline Result<ExperimentRun> run_bvp(const ExperimentConfig& c) {
  auto mesh = detail::config_mesh(c, 3);
  if (!mesh) return Result<ExperimentRun>::fail(mesh.error());
  const ExactSolution sol(c.solution);
  const ScalarField exact = ScalarField::sample(
      mesh.value(), [&](double x, double y) { return sol.u(x, y); });

  const auto t0 = std::chrono::steady_clock::now();
  const BVProblem problem{mesh.value(), exact, c.kind, c.iterations, {}, c.forms};
  ScalarField field = init_bvp(problem);
  bool diverged = !field.all_finite();
  if (!diverged) {
    SolveReport rep = relax(problem, field);
    diverged = rep.diverged;
    field = std::move(rep.field);
  }
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();

  ErrorReport report = detail::measure_errors(field, exact, diverged, ms);
  return Result<ExperimentRun>::ok(
      ExperimentRun{mesh.value(), std::move(field), exact, report});
}

// Initial-value run: marches the grid from `start` using the two exact edges
// adjacent to it.
inline Result<ExperimentRun> run_ivp(const ExperimentConfig& c, GridCorner start) {
  auto mesh = detail::config_mesh(c, 2);
  if (!mesh) return Result<ExperimentRun>::fail(mesh.error());
  const ExactSolution sol(c.solution);
  const ScalarField exact = ScalarField::sample(
      mesh.value(), [&](double x, double y) { return sol.u(x, y); });

  const auto t0 = std::chrono::steady_clock::now();
  MarchReport rep = march_ivp(mesh.value(), exact, c.kind, start);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();

  ErrorReport report = detail::measure_errors(rep.field, exact, rep.diverged, ms);
  return Result<ExperimentRun>::ok(
      ExperimentRun{mesh.value(), std::move(rep.field), exact, report});
}

inline Result<ErrorReport> run_experiment(const ExperimentConfig& c) {
  auto run = run_bvp(c);
  if (!run) return Result<ErrorReport>::fail(run.error());
  return Result<ErrorReport>::ok(run.value().report);
}

// ---------------------------------------------------------------------------
// Table drivers.

struct Table1Row {
  SchemeKind kind = SchemeKind::Standard;
  double h = 0.0, k = 0.0;
  ErrorReport report;
};

// Mean absolute errors for the secant solution on [1,2]^2 after 100 sweeps,
// at four resolutions, for both schemes.
inline std::vector<Table1Row> run_table1(FormsMode forms = FormsMode::Four) {
  std::vector<Table1Row> rows;
  for (const SchemeKind kind : {SchemeKind::Standard, SchemeKind::Invariant}) {
    for (const double h : {0.1, 0.05, 0.01, 0.005}) {
      ExperimentConfig c;
      c.solution = SolutionKind::Secant;
      c.x0 = c.y0 = 1.0;
      c.width = c.height = 1.0;
      c.h = c.k = h;
      c.kind = kind;
      c.iterations = 100;
      c.forms = forms;
      const auto rep = run_experiment(c);
      if (!rep) throw std::logic_error("run_table1: " + rep.error());
      rows.push_back(Table1Row{kind, h, h, rep.value()});
    }
  }
  return rows;
}

struct Table2Row {
  SchemeKind kind = SchemeKind::Standard;
  double x0 = 0.0;  // y0 = x0; unit square; h = k = 0.01
  ErrorReport report;
};

// Maximal absolute errors on unit squares sliding toward the secant pole at
// x + y = pi/2.
inline std::vector<Table2Row> run_table2(FormsMode forms = FormsMode::Four) {
  std::vector<Table2Row> rows;
  for (const SchemeKind kind : {SchemeKind::Standard, SchemeKind::Invariant}) {
    for (const double x0 : {0.87, 0.86, 0.85, 0.84}) {
      ExperimentConfig c;
      c.solution = SolutionKind::Secant;
      c.x0 = c.y0 = x0;
      c.width = c.height = 1.0;
      c.h = c.k = 0.01;
      c.kind = kind;
      c.iterations = 100;
      c.forms = forms;
      const auto rep = run_experiment(c);
      if (!rep) throw std::logic_error("run_table2: " + rep.error());
      rows.push_back(Table2Row{kind, x0, rep.value()});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Invariance suite: random data, random group element, evaluate every joint
// invariant before and after the discretized action.

inline const char* group_name(GroupKind group) {
  switch (group) {
    case GroupKind::G1: return "g1";
    case GroupKind::G2: return "g2";
    case GroupKind::G3: return "g3";
  }
  return "?";
}

struct InvarianceReport {
  GroupKind group = GroupKind::G1;
  int trials = 0;
  double worst_drift = 0.0;    // over all joint invariants and trials
  double control_drift = 0.0;  // naive quotient F (populated for G2 only)
  bool pass = false;           // worst_drift <= 1e-9
};

namespace detail {

inline double drift(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline RectMesh random_rect_mesh(Rng& rng, std::size_t nx, std::size_t ny) {
  std::vector<double> xs(nx), ys(ny);
  xs[0] = 0.1;
  for (std::size_t m = 1; m < nx; ++m) xs[m] = xs[m - 1] + rng.uniform(0.4, 1.0);
  ys[0] = -0.2;
  for (std::size_t n = 1; n < ny; ++n) ys[n] = ys[n - 1] + rng.uniform(0.3, 0.8);
  return RectMesh(std::move(xs), std::move(ys));
}

inline ScalarField random_positive_field(Rng& rng, std::size_t nx,
                                         std::size_t ny) {
  ScalarField u(nx, ny);
  for (std::size_t m = 0; m < nx; ++m)
    for (std::size_t n = 0; n < ny; ++n) u.at(m, n) = rng.uniform(0.5, 2.0);
  return u;
}

struct RandomG3Data {
  GeneralMesh mesh;
  ScalarField u;
};

// Columnwise positive-quadratic profiles keep the chart condition u_yy > 0.
inline RandomG3Data random_g3_data(Rng& rng, std::size_t nx, std::size_t ny) {
  std::vector<double> xs(nx), slope(nx), offset(nx);
  xs[0] = 0.2;
  for (std::size_t m = 1; m < nx; ++m) xs[m] = xs[m - 1] + rng.uniform(0.3, 0.7);
  for (std::size_t m = 0; m < nx; ++m) {
    slope[m] = rng.uniform(0.4, 1.0);
    offset[m] = rng.uniform(-0.3, 0.3);
  }
  ScalarField u(nx, ny);
  for (std::size_t m = 0; m < nx; ++m) {
    const double P = rng.uniform(0.5, 1.5);
    const double Q = rng.uniform(-0.5, 0.5);
    const double R = rng.uniform(-0.5, 0.5);
    const double C = rng.uniform(0.0, 0.2);
    for (std::size_t n = 0; n < ny; ++n) {
      const double t = static_cast<double>(n);
      u.at(m, n) = P * (t + 1.0) * (t + 1.0) + Q * t + R + C * t * t * t;
    }
  }
  return {GeneralMesh(std::move(xs), std::move(slope), std::move(offset)),
          std::move(u)};
}

inline const std::array<G1Symbol, 13>& all_g1_symbols() {
  static const std::array<G1Symbol, 13> symbols = {
      G1Symbol::IotaX1, G1Symbol::IotaX2, G1Symbol::IotaU01, G1Symbol::IotaU11,
      G1Symbol::IotaU02, G1Symbol::I1d,   G1Symbol::J01d,    G1Symbol::I2d,
      G1Symbol::J02d,    G1Symbol::J11d,  G1Symbol::I01d,    G1Symbol::I02d,
      G1Symbol::I11d};
  return symbols;
}

}  // namespace detail

inline InvarianceReport run_invariance_suite(GroupKind group, int trials,
                                             std::uint64_t seed) {
  InvarianceReport out;
  out.group = group;
  out.trials = trials;
  const double inf = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(t);
    switch (group) {
      case GroupKind::G1: {
        Rng rng(1000 + s);
        const RectMesh mesh = detail::random_rect_mesh(rng, 4, 4);
        const ScalarField u = detail::random_positive_field(rng, 4, 4);
        const TransformedRect tr =
            act_discrete_g1(random_element_g1(5000 + s), mesh, u);
        for (const G1Symbol sym : detail::all_g1_symbols()) {
          const auto before = invariantize_g1(mesh, u, 0, 0, sym);
          const auto after = invariantize_g1(tr.mesh, tr.field, 0, 0, sym);
          out.worst_drift =
              before && after
                  ? std::max(out.worst_drift,
                             detail::drift(before.value(), after.value()))
                  : inf;
        }
        break;
      }
      case GroupKind::G2: {
        Rng rng(2000 + s);
        const RectMesh mesh = detail::random_rect_mesh(rng, 4, 4);
        const ScalarField u = detail::random_positive_field(rng, 4, 4);
        const TransformedRect tr =
            act_discrete_g2(random_element_g2(6000 + s), mesh, u);
        const std::size_t pairs[4][2] = {{1, 1}, {2, 1}, {1, 2}, {2, 2}};
        for (const auto& kl : pairs) {
          const auto before = invariantize_u_g2(u, 0, 0, kl[0], kl[1]);
          const auto after = invariantize_u_g2(tr.field, 0, 0, kl[0], kl[1]);
          out.worst_drift =
              before && after
                  ? std::max(out.worst_drift,
                             detail::drift(before.value(), after.value()))
                  : inf;
        }
        const auto c0 = cell_from_field(u, mesh, 0, 0);
        const auto c1 = cell_from_field(tr.field, tr.mesh, 0, 0);
        if (c0 && c1) {
          const auto i0 = invariant_I11d_g2(c0.value());
          const auto i1 = invariant_I11d_g2(c1.value());
          out.worst_drift =
              i0 && i1 ? std::max(out.worst_drift,
                                  detail::drift(i0.value(), i1.value()))
                       : inf;
          const auto n0 = naive_I11_approximation(c0.value());
          const auto n1 = naive_I11_approximation(c1.value());
          if (n0 && n1)
            out.control_drift = std::max(
                out.control_drift, detail::drift(n0.value(), n1.value()));
        } else {
          out.worst_drift = inf;
        }
        break;
      }
      case GroupKind::G3: {
        Rng rng(3000 + s);
        const detail::RandomG3Data data = detail::random_g3_data(rng, 5, 5);
        const TransformedGeneral tr =
            act_discrete_g3(random_element_g3(7000 + s), data.mesh, data.u);
        const auto before = invariants_g3(data.mesh, data.u, 0, 0);
        const auto after = invariants_g3(tr.mesh, tr.field, 0, 0);
        if (before && after) {
          const auto& b = before.value();
          const auto& a = after.value();
          const std::array<std::pair<double, double>, 5> checks = {
              {{b.I03d, a.I03d},
               {b.I12d, a.I12d},
               {b.iota_dx, a.iota_dx},
               {b.iota_dy_forward, a.iota_dy_forward},
               {b.iota_dy_vertical, a.iota_dy_vertical}}};
          for (const auto& pair : checks)
            out.worst_drift = std::max(out.worst_drift,
                                       detail::drift(pair.first, pair.second));
        } else {
          out.worst_drift = inf;
        }
        break;
      }
    }
  }
  out.pass = out.worst_drift <= 1e-9;
  return out;
}

// ---------------------------------------------------------------------------
// Convergence suite: observed orders for every discrete invariant against
// its continuous target, and for both scheme residuals on each exact
// solution, over five mesh halvings.

struct ConvergenceRow {
  std::string quantity;
  double first_error = 0.0;
  double last_error = 0.0;
  double observed_order = 0.0;
  bool pass = false;  // order in [0.8, 1.2] and the error decreased
};

namespace detail {

inline double fitted_order(const std::vector<double>& hs,
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

inline ConvergenceRow make_row(std::string quantity,
                               const std::vector<double>& hs,
                               const std::vector<double>& errs) {
  ConvergenceRow row;
  row.quantity = std::move(quantity);
  row.first_error = errs.front();
  row.last_error = errs.back();
  row.observed_order = fitted_order(hs, errs);
  row.pass = row.observed_order >= 0.8 && row.observed_order <= 1.2 &&
             errs.back() < errs.front();
  return row;
}

}  // namespace detail

inline std::vector<ConvergenceRow> run_convergence_suite() {
  std::vector<ConvergenceRow> rows;
  const std::vector<double> levels = {1.0, 0.5, 0.25, 0.125, 0.0625};

  // G1 invariants in computational variables on x = s + 0.3 sin s,
  // u = exp(0.4 s + 0.3 t) + 0.5 at (s0, t0); targets from the continuous
  // normalized invariants, weights from the mesh-power each invariant
  // carries.
  {
    const double s0 = 0.4, t0 = 0.2;
    const double u0 = std::exp(0.4 * s0 + 0.3 * t0) + 0.5;
    G1ContinuousJet jet;
    jet.u = u0;
    jet.us = 0.4 * (u0 - 0.5);
    jet.ut = 0.3 * (u0 - 0.5);
    jet.ust = 0.12 * (u0 - 0.5);
    jet.utt = 0.09 * (u0 - 0.5);
    jet.xs = 1.0 + 0.3 * std::cos(s0);
    jet.xss = -0.3 * std::sin(s0);
    const auto targets = continuous_normalized_invariants_g1(jet);
    if (!targets)
      throw std::logic_error("run_convergence_suite: g1 jet targets failed");

    struct Probe {
      const char* name;
      G1Symbol sym;
      int weight;
      double target;
    };
    const std::vector<Probe> probes = {
        {"g1_I1d", G1Symbol::I1d, 1, targets.value().I1},
        {"g1_I2d", G1Symbol::I2d, 2, targets.value().I2},
        {"g1_J01d", G1Symbol::J01d, 1, targets.value().J01},
        {"g1_J02d", G1Symbol::J02d, 2, targets.value().J02},
        {"g1_J11d", G1Symbol::J11d, 2, targets.value().J11}};
    for (const Probe& p : probes) {
      std::vector<double> hs, errs;
      for (const double scale : levels) {
        const double e = 0.1 * scale;
        std::vector<double> xs(3), ys(3);
        for (int i = 0; i < 3; ++i) {
          const double s = s0 + i * e;
          xs[i] = s + 0.3 * std::sin(s);
          ys[i] = t0 + i * e;
        }
        const RectMesh mesh(xs, ys);
        ScalarField u(3, 3);
        for (std::size_t i = 0; i < 3; ++i)
          for (std::size_t j = 0; j < 3; ++j)
            u.at(i, j) = std::exp(0.4 * (s0 + i * e) + 0.3 * (t0 + j * e)) + 0.5;
        const auto v = invariantize_g1(mesh, u, 0, 0, p.sym);
        if (!v) throw std::logic_error("run_convergence_suite: " + v.error());
        hs.push_back(e);
        errs.push_back(std::abs(v.value() / std::pow(e, p.weight) - p.target));
      }
      rows.push_back(detail::make_row(p.name, hs, errs));
    }
  }

  // G1 invariants in physical variables on the rational solution at (1,1):
  // u_y/u = -1, u_yy/u = 1.5, I11 = 1.
  {
    struct Probe {
      const char* name;
      G1Symbol sym;
      double target;
    };
    const std::vector<Probe> probes = {{"g1_I01d", G1Symbol::I01d, -1.0},
                                       {"g1_I02d", G1Symbol::I02d, 1.5},
                                       {"g1_I11d", G1Symbol::I11d, 1.0}};
    for (const Probe& p : probes) {
      std::vector<double> hs, errs;
      for (const double scale : levels) {
        const double e = 0.05 * scale;
        const RectMesh mesh = RectMesh::uniform(1.0, e, 3, 1.0, e, 3);
        const ScalarField u = ScalarField::sample(mesh, [](double x, double y) {
          return 2.0 / ((x + y) * (x + y));
        });
        const auto v = invariantize_g1(mesh, u, 0, 0, p.sym);
        if (!v) throw std::logic_error("run_convergence_suite: " + v.error());
        hs.push_back(e);
        errs.push_back(std::abs(v.value() - p.target));
      }
      rows.push_back(detail::make_row(p.name, hs, errs));
    }
  }

  // G2 fundamental invariant on the rational solution; its target is the
  // PDE's right-hand side 1.
  {
    std::vector<double> hs, errs;
    for (const double scale : levels) {
      const double e = 0.05 * scale;
      const RectMesh mesh = RectMesh::uniform(1.0, e, 3, 1.0, e, 3);
      const ScalarField u = ScalarField::sample(mesh, [](double x, double y) {
        return 2.0 / ((x + y) * (x + y));
      });
      const auto cell = cell_from_field(u, mesh, 0, 0);
      if (!cell) throw std::logic_error("run_convergence_suite: " + cell.error());
      const auto v = invariant_I11d_g2(cell.value());
      if (!v) throw std::logic_error("run_convergence_suite: " + v.error());
      hs.push_back(e);
      errs.push_back(std::abs(v.value() - 1.0));
    }
    rows.push_back(detail::make_row("g2_I11d", hs, errs));
  }

  // G3 invariants on a cubic patch over meshes y = beta(x) + n e alpha(x).
  {
    const double x0 = 0.5;
    const auto alpha = [](double x) { return 1.0 + 0.2 * std::sin(x); };
    const auto beta = [](double x) { return 0.3 + 0.1 * x; };
    const auto uf = [](double x, double y) {
      return y * y * y + x * y * y + 0.3 * x * x * y + 0.2 * x +
             0.1 * x * y * y * y;
    };
    const double y0 = beta(x0);
    const double u0 = uf(x0, y0);
    const double uyy0 = 6.0 * y0 + 2.0 * x0 + 0.6 * x0 * y0;
    const double uyyy0 = 6.0 + 0.6 * x0;
    const double uy0 =
        3.0 * y0 * y0 + 2.0 * x0 * y0 + 0.3 * x0 * x0 + 0.3 * x0 * y0 * y0;
    const double uxyy0 = 2.0 + 0.6 * y0;
    const double pow32 = uyy0 * std::sqrt(uyy0);
    const double root = std::sqrt(uyy0);
    const double I03_target = uyyy0 / pow32;
    const double I12_target = (uxyy0 + u0 * uyyy0 + 2.0 * uy0 * uyy0) / pow32;

    std::vector<double> hs;
    std::vector<std::vector<double>> errs(5);
    for (const double scale : levels) {
      const double e = 0.04 * scale;
      std::vector<double> xs(4), slope(4), offset(4);
      for (int m = 0; m < 4; ++m) {
        xs[m] = x0 + m * e;
        slope[m] = e * alpha(xs[m]);
        offset[m] = beta(xs[m]);
      }
      const GeneralMesh mesh(xs, slope, offset);
      const ScalarField u = ScalarField::sample(mesh, 4, uf);
      const auto inv = invariants_g3(mesh, u, 0, 0);
      if (!inv) throw std::logic_error("run_convergence_suite: " + inv.error());
      hs.push_back(e);
      errs[0].push_back(std::abs(inv.value().I03d - I03_target));
      errs[1].push_back(std::abs(inv.value().I12d - I12_target));
      errs[2].push_back(std::abs(inv.value().iota_dx / e - root));
      errs[3].push_back(
          std::abs(inv.value().iota_dy_forward / e - (0.1 - u0) * root));
      errs[4].push_back(
          std::abs(inv.value().iota_dy_vertical / e - alpha(x0) * root));
    }
    const char* names[5] = {"g3_I03d", "g3_I12d", "g3_iota_dx",
                            "g3_iota_dy_forward", "g3_iota_dy_vertical"};
    for (int i = 0; i < 5; ++i)
      rows.push_back(detail::make_row(names[i], hs, errs[i]));
  }

  // Scheme residuals on each exact solution at a fixed interior point.
  {
    for (const SolutionKind sk :
         {SolutionKind::Rational, SolutionKind::Secant,
          SolutionKind::Exponential}) {
      const ExactSolution sol(sk);
      for (const SchemeKind kind :
           {SchemeKind::Invariant, SchemeKind::Standard}) {
        std::vector<double> hs, errs;
        for (int j = 0; j < 5; ++j) {
          const double e = 0.05 / (1 << j);
          const RectMesh mesh = RectMesh::uniform(1.3, e, 3, 1.4, e, 3);
          const ScalarField u = ScalarField::sample(
              mesh, [&](double x, double y) { return sol.u(x, y); });
          const auto cell = cell_from_field(u, mesh, 0, 0);
          if (!cell)
            throw std::logic_error("run_convergence_suite: " + cell.error());
          const auto r = residual(kind, cell.value());
          if (!r) throw std::logic_error("run_convergence_suite: " + r.error());
          hs.push_back(e);
          errs.push_back(std::abs(r.value()));
        }
        rows.push_back(detail::make_row(std::string("residual_") +
                                            scheme_name(kind) + "_" + sol.name(),
                                        hs, errs));
      }
    }
  }

  return rows;
}

// ---------------------------------------------------------------------------
// CSV output.  Numbers are written with %.17g so parsing an emitted table
// reproduces every double bit-for-bit; runtimes are deliberately left out so
// repeated runs emit identical bytes.

struct SolutionDumpRow {
  double x = 0.0, y = 0.0;
  double u_numeric = 0.0, u_exact = 0.0, error = 0.0;
};

namespace detail {

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

inline Result<double> parse_number(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    return Result<double>::fail("csv: malformed number '" + s + "'");
  return Result<double>::ok(v);
}

inline Result<SchemeKind> parse_scheme(const std::string& s) {
  if (s == "standard") return Result<SchemeKind>::ok(SchemeKind::Standard);
  if (s == "invariant") return Result<SchemeKind>::ok(SchemeKind::Invariant);
  return Result<SchemeKind>::fail("csv: unknown scheme '" + s + "'");
}

}  // namespace detail

inline std::string to_csv(const std::vector<Table1Row>& rows) {
  std::string out = "scheme,h,k,mean_abs_error,diverged\n";
  for (const Table1Row& r : rows) {
    out += scheme_name(r.kind);
    out += ',' + detail::g17(r.h) + ',' + detail::g17(r.k) + ',' +
           detail::g17(r.report.mean_abs) + ',' +
           (r.report.diverged ? "1" : "0") + '\n';
  }
  return out;
}

// Rebuilds the CSV-carried fields; quantities the table does not serialize
// (interior mean, max, runtime) come back zeroed.
inline Result<std::vector<Table1Row>> table1_from_csv(const std::string& text) {
  using R = Result<std::vector<Table1Row>>;
  const auto lines = detail::split_lines(text);
  if (lines.empty() || lines[0] != "scheme,h,k,mean_abs_error,diverged")
    return R::fail("csv: missing table1 header");
  std::vector<Table1Row> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = detail::split_line(lines[i]);
    if (cols.size() != 5) return R::fail("csv: expected 5 columns");
    const auto kind = detail::parse_scheme(cols[0]);
    const auto h = detail::parse_number(cols[1]);
    const auto k = detail::parse_number(cols[2]);
    const auto mean = detail::parse_number(cols[3]);
    if (!kind) return R::fail(kind.error());
    if (!h) return R::fail(h.error());
    if (!k) return R::fail(k.error());
    if (!mean) return R::fail(mean.error());
    Table1Row row;
    row.kind = kind.value();
    row.h = h.value();
    row.k = k.value();
    row.report.mean_abs = mean.value();
    row.report.diverged = cols[4] == "1";
    rows.push_back(row);
  }
  return R::ok(std::move(rows));
}

inline std::string to_csv(const std::vector<Table2Row>& rows) {
  std::string out = "scheme,x0,y0,h,k,max_abs_error,diverged\n";
  for (const Table2Row& r : rows) {
    out += scheme_name(r.kind);
    out += ',' + detail::g17(r.x0) + ',' + detail::g17(r.x0) + ",0.01,0.01," +
           detail::g17(r.report.max_abs) + ',' +
           (r.report.diverged ? "1" : "0") + '\n';
  }
  return out;
}

inline Result<std::vector<Table2Row>> table2_from_csv(const std::string& text) {
  using R = Result<std::vector<Table2Row>>;
  const auto lines = detail::split_lines(text);
  if (lines.empty() || lines[0] != "scheme,x0,y0,h,k,max_abs_error,diverged")
    return R::fail("csv: missing table2 header");
  std::vector<Table2Row> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = detail::split_line(lines[i]);
    if (cols.size() != 7) return R::fail("csv: expected 7 columns");
    const auto kind = detail::parse_scheme(cols[0]);
    const auto x0 = detail::parse_number(cols[1]);
    const auto max = detail::parse_number(cols[5]);
    if (!kind) return R::fail(kind.error());
    if (!x0) return R::fail(x0.error());
    if (!max) return R::fail(max.error());
    Table2Row row;
    row.kind = kind.value();
    row.x0 = x0.value();
    row.report.max_abs = max.value();
    row.report.diverged = cols[6] == "1";
    rows.push_back(row);
  }
  return R::ok(std::move(rows));
}

inline std::string to_csv(const std::vector<InvarianceReport>& rows) {
  std::string out = "group,trials,worst_drift,control_drift,pass\n";
  for (const InvarianceReport& r : rows) {
    out += group_name(r.group);
    out += ',' + std::to_string(r.trials) + ',' + detail::g17(r.worst_drift) +
           ',' + detail::g17(r.control_drift) + ',' + (r.pass ? "1" : "0") +
           '\n';
  }
  return out;
}

inline std::string to_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "quantity,first_error,last_error,observed_order,pass\n";
  for (const ConvergenceRow& r : rows) {
    out += r.quantity + ',' + detail::g17(r.first_error) + ',' +
           detail::g17(r.last_error) + ',' + detail::g17(r.observed_order) +
           ',' + (r.pass ? "1" : "0") + '\n';
  }
  return out;
}

inline std::string to_csv(const std::vector<SolutionDumpRow>& rows) {
  std::string out = "x,y,u_numeric,u_exact,error\n";
  for (const SolutionDumpRow& r : rows) {
    out += detail::g17(r.x) + ',' + detail::g17(r.y) + ',' +
           detail::g17(r.u_numeric) + ',' + detail::g17(r.u_exact) + ',' +
           detail::g17(r.error) + '\n';
  }
  return out;
}

// Row-major dump of a finished run for external plotting.
inline std::vector<SolutionDumpRow> dump_rows(const ExperimentRun& run) {
  std::vector<SolutionDumpRow> rows;
  rows.reserve(run.mesh.nx() * run.mesh.ny());
  for (std::size_t m = 0; m < run.mesh.nx(); ++m)
    for (std::size_t n = 0; n < run.mesh.ny(); ++n) {
      SolutionDumpRow row;
      row.x = run.mesh.x(m);
      row.y = run.mesh.y(n);
      row.u_numeric = run.field.at(m, n);
      row.u_exact = run.exact.at(m, n);
      row.error = std::abs(row.u_numeric - row.u_exact);
      rows.push_back(row);
    }
  return rows;
}

}  // namespace invfd
