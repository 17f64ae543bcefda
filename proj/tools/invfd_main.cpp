// Command-line driver: benchmark tables, single BVP/IVP runs, invariance and
// convergence suites, and solution dumps, all emitted as CSV.
//
// Exit codes: 0 success, 1 usage error, 2 numerical divergence or a failing
// suite in non-table runs (table rows report divergence as data).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "invfd/bench.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDiverged = 2;

struct Flags {
  std::string scheme = "invariant";
  std::string solution = "secant";
  std::string corner = "bl";
  double x0 = 1.0, y0 = 1.0, width = 1.0, height = 1.0, h = 0.1, k = 0.1;
  int iterations = 100;
  std::uint64_t seed = 0;
  int forms = 4;
  bool allow_singular = false;
  std::string out;
};

void add_common_flags(CLI::App* sub, Flags& f) {
  // Long-only help so the step flag --h stays available.
  sub->set_help_flag("--help", "Print this help message and exit");
  sub->add_option("--seed", f.seed, "Seed for randomized runs");
  sub->add_option("--out", f.out, "Write CSV to this path instead of stdout");
  sub->add_option("--forms", f.forms, "Corner forms averaged per update (3 or 4)")
      ->check(CLI::IsMember({3, 4}));
}

void add_experiment_flags(CLI::App* sub, Flags& f) {
  add_common_flags(sub, f);
  sub->add_option("--scheme", f.scheme, "Scheme: standard or invariant")
      ->check(CLI::IsMember({"standard", "invariant"}));
  sub->add_option("--solution", f.solution,
                  "Exact solution: rational, secant, or exponential")
      ->check(CLI::IsMember({"rational", "secant", "exponential"}));
  sub->add_option("--x0", f.x0, "Domain corner x");
  sub->add_option("--y0", f.y0, "Domain corner y");
  sub->add_option("--width", f.width, "Domain width");
  sub->add_option("--height", f.height, "Domain height");
  sub->add_option("--h", f.h, "Step in x");
  sub->add_option("--k", f.k, "Step in y");
  sub->add_option("--iterations", f.iterations, "Relaxation sweeps");
  sub->add_flag("--allow-singular", f.allow_singular,
                "Permit domains crossing a singular line of the solution");
}

invfd::ExperimentConfig to_config(const Flags& f) {
  invfd::ExperimentConfig c;
  c.solution = f.solution == "rational" ? invfd::SolutionKind::Rational
               : f.solution == "exponential" ? invfd::SolutionKind::Exponential
                                             : invfd::SolutionKind::Secant;
  c.kind = f.scheme == "standard" ? invfd::SchemeKind::Standard
                                  : invfd::SchemeKind::Invariant;
  c.x0 = f.x0;
  c.y0 = f.y0;
  c.width = f.width;
  c.height = f.height;
  c.h = f.h;
  c.k = f.k;
  c.iterations = f.iterations;
  c.seed = f.seed;
  c.forms = f.forms == 3 ? invfd::FormsMode::Three : invfd::FormsMode::Four;
  c.allow_singular = f.allow_singular;
  return c;
}

// Returns kUsage if the path cannot be opened; with no path the CSV goes to
// stdout.
int emit_csv(const std::string& path, const std::string& csv) {
  if (path.empty()) {
    std::cout << csv;
    return kOk;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot open '" << path << "' for writing\n";
    return kUsage;
  }
  file << csv;
  return kOk;
}

void print_report(const invfd::ExperimentRun& run, const Flags& f) {
  std::printf("scheme=%s solution=%s grid=%zux%zu h=%.8g k=%.8g\n",
              f.scheme.c_str(), f.solution.c_str(), run.mesh.nx(),
              run.mesh.ny(), f.h, f.k);
  std::printf(
      "mean_abs_error=%.8g max_abs_error=%.8g diverged=%s runtime_ms=%lld\n",
      run.report.mean_abs, run.report.max_abs,
      run.report.diverged ? "yes" : "no",
      static_cast<long long>(run.report.runtime_ms));
}

int run_table_cmd(int which, const Flags& f) {
  const invfd::FormsMode forms =
      f.forms == 3 ? invfd::FormsMode::Three : invfd::FormsMode::Four;
  std::string csv;
  if (which == 1)
    csv = invfd::to_csv(invfd::run_table1(forms));
  else
    csv = invfd::to_csv(invfd::run_table2(forms));
  const int code = emit_csv(f.out, csv);
  if (code == kOk && !f.out.empty())
    std::printf("wrote table %d to %s\n", which, f.out.c_str());
  return code;
}

int run_solve_cmd(bool bvp, const Flags& f) {
  const invfd::ExperimentConfig c = to_config(f);
  invfd::Result<invfd::ExperimentRun> run = invfd::Result<invfd::ExperimentRun>::fail("");
  if (bvp) {
    run = invfd::run_bvp(c);
  } else {
    invfd::GridCorner corner = invfd::GridCorner::BottomLeft;
    if (f.corner == "br") corner = invfd::GridCorner::BottomRight;
    else if (f.corner == "tl") corner = invfd::GridCorner::TopLeft;
    else if (f.corner == "tr") corner = invfd::GridCorner::TopRight;
    run = invfd::run_ivp(c, corner);
  }
  if (!run) {
    std::cerr << "error: " << run.error() << '\n';
    return kUsage;
  }
  print_report(run.value(), f);
  if (!f.out.empty()) {
    const int code = emit_csv(f.out, invfd::to_csv(invfd::dump_rows(run.value())));
    if (code != kOk) return code;
  }
  return run.value().report.diverged ? kDiverged : kOk;
}

int run_dump_cmd(const Flags& f) {
  const auto run = invfd::run_bvp(to_config(f));
  if (!run) {
    std::cerr << "error: " << run.error() << '\n';
    return kUsage;
  }
  const int code = emit_csv(f.out, invfd::to_csv(invfd::dump_rows(run.value())));
  if (code != kOk) return code;
  return run.value().report.diverged ? kDiverged : kOk;
}

int run_invariance_cmd(const std::string& group, int trials, const Flags& f) {
  std::vector<invfd::GroupKind> groups;
  if (group == "g1") groups = {invfd::GroupKind::G1};
  else if (group == "g2") groups = {invfd::GroupKind::G2};
  else if (group == "g3") groups = {invfd::GroupKind::G3};
  else groups = {invfd::GroupKind::G1, invfd::GroupKind::G2, invfd::GroupKind::G3};

  std::vector<invfd::InvarianceReport> reports;
  bool all_pass = true;
  for (const invfd::GroupKind g : groups) {
    reports.push_back(invfd::run_invariance_suite(g, trials, f.seed));
    const invfd::InvarianceReport& r = reports.back();
    all_pass = all_pass && r.pass;
    std::printf("%s: trials=%d worst_drift=%.3e control_drift=%.3e %s\n",
                invfd::group_name(r.group), r.trials, r.worst_drift,
                r.control_drift, r.pass ? "pass" : "FAIL");
  }
  if (!f.out.empty()) {
    const int code = emit_csv(f.out, invfd::to_csv(reports));
    if (code != kOk) return code;
  }
  return all_pass ? kOk : kDiverged;
}

int run_convergence_cmd(const Flags& f) {
  const auto rows = invfd::run_convergence_suite();
  bool all_pass = true;
  for (const invfd::ConvergenceRow& r : rows) {
    all_pass = all_pass && r.pass;
    std::printf("%-32s first=%.3e last=%.3e order=%.3f %s\n",
                r.quantity.c_str(), r.first_error, r.last_error,
                r.observed_order, r.pass ? "pass" : "FAIL");
  }
  const int code = emit_csv(f.out, invfd::to_csv(rows));
  if (code != kOk) return code;
  return all_pass ? kOk : kDiverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant finite-difference schemes: benchmarks and solvers"};
  app.require_subcommand(1);

  Flags f;
  std::string group = "all";
  int trials = 100;

  CLI::App* t1 = app.add_subcommand("table1", "Mean-error table, both schemes");
  add_common_flags(t1, f);
  CLI::App* t2 = app.add_subcommand("table2", "Max-error table near the pole");
  add_common_flags(t2, f);

  CLI::App* bvp = app.add_subcommand("solve-bvp", "Relax one boundary-value run");
  add_experiment_flags(bvp, f);
  CLI::App* ivp = app.add_subcommand("solve-ivp", "March one initial-value run");
  add_experiment_flags(ivp, f);
  ivp->add_option("--corner", f.corner, "March start: bl, br, tl, or tr")
      ->check(CLI::IsMember({"bl", "br", "tl", "tr"}));

  CLI::App* dump =
      app.add_subcommand("dump-solution", "Emit x,y,u_numeric,u_exact,error rows");
  add_experiment_flags(dump, f);

  CLI::App* inv = app.add_subcommand("invariance", "Invariance drift suite");
  add_common_flags(inv, f);
  inv->add_option("--group", group, "Group: g1, g2, g3, or all")
      ->check(CLI::IsMember({"g1", "g2", "g3", "all"}));
  inv->add_option("--trials", trials, "Random elements per group");

  CLI::App* conv = app.add_subcommand("convergence", "Observed-order suite");
  add_common_flags(conv, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;  // help/version exit 0, usage errors 1
  }

  try {
    if (t1->parsed()) return run_table_cmd(1, f);
    if (t2->parsed()) return run_table_cmd(2, f);
    if (bvp->parsed()) return run_solve_cmd(true, f);
    if (ivp->parsed()) return run_solve_cmd(false, f);
    if (dump->parsed()) return run_dump_cmd(f);
    if (inv->parsed()) return run_invariance_cmd(group, trials, f);
    if (conv->parsed()) return run_convergence_cmd(f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
