// mixphase: run scenario files through the interferometer / transport /
// holonomy pipeline.
//
//   mixphase interfere SCENARIO [--chi-samples N] [--out FILE] [--simulate]
//   mixphase transport SCENARIO [--steps N] [--substeps N] [--tol-transport X]
//                               [--tol-integral X] [--out FILE]
//   mixphase bloch SCENARIO [--radii a,b,...] [--out FILE]
//   mixphase purify-check SCENARIO [--out FILE]
//   mixphase validate [SCENARIO] [--seed N] [--steps N]
//
// Errors go to stderr as one line, `error: <Code>: <context>`, with exit code
// 2 (invalid input or failed validation), 3 (unreadable scenario or output)
// or 4 (numerical abort).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mixphase/purification.hpp"
#include "mixphase/scenario.hpp"
#include "mixphase/validation.hpp"

namespace {

using namespace mixphase;
namespace sc = mixphase::scenario;

struct Options {
  std::string scenario_file;
  int steps = 0;
  int substeps = 0;
  double tol_transport = 0.0;
  double tol_integral = 0.0;
  int chi_samples = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<double> radii;
  bool simulate = false;

  CLI::Option* steps_opt = nullptr;
  CLI::Option* substeps_opt = nullptr;
  CLI::Option* tol_transport_opt = nullptr;
  CLI::Option* tol_integral_opt = nullptr;
  CLI::Option* chi_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* sub, Options& o, bool scenario_required = true) {
  auto* file = sub->add_option("scenario", o.scenario_file, "scenario file (YAML)");
  if (scenario_required) file->required();
  o.steps_opt = sub->add_option("--steps", o.steps, "grid steps (per arc for waypoint paths)");
  o.substeps_opt = sub->add_option("--substeps", o.substeps, "integrator substeps per grid step");
  o.tol_transport_opt = sub->add_option("--tol-transport", o.tol_transport, "transport defect tolerance");
  o.tol_integral_opt = sub->add_option("--tol-integral", o.tol_integral, "trace/integral route tolerance");
  o.chi_opt = sub->add_option("--chi-samples", o.chi_samples, "points in the chi scan");
  o.seed_opt = sub->add_option("--seed", o.seed, "seed for randomized batches");
  sub->add_option("--out", o.out, "output file (default stdout)");
}

sc::Scenario load(const Options& o) {
  sc::Scenario s = sc::load_scenario(o.scenario_file);
  if (o.steps_opt->count()) s.steps = o.steps;
  if (o.substeps_opt->count()) s.substeps = o.substeps;
  if (o.tol_transport_opt->count()) s.tolerances.transport_tol = o.tol_transport;
  if (o.tol_integral_opt->count()) s.tolerances.integral_tol = o.tol_integral;
  if (o.chi_opt->count()) {
    if (o.chi_samples < 0) throw Error(ErrorCode::PathTooShort, "--chi-samples must be positive");
    s.chi_samples = static_cast<std::size_t>(o.chi_samples);
  }
  if (o.seed_opt->count()) s.seed = o.seed;
  sc::check_scenario(s);
  return s;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
  } else {
    sc::write_atomically(o.out, text);
  }
}

int cmd_interfere(const Options& o) {
  const sc::Scenario s = load(o);
  const sc::Pipeline p = sc::build_pipeline(s);
  const sc::RunResult r = sc::run_pipeline(s, p);
  const std::vector<double> grid = uniform_chi_grid(s.chi_samples);
  const InterferenceProfile scan =
      scan_profile(p.rho0, p.path.final_operator(), grid, s.tolerances.phase_tol);
  double worst = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    worst = std::max(worst, std::abs(scan.intensity[j] - r.profile.intensity[j]));
  }
  emit(o, sc::format_profile_csv(o.simulate ? scan : r.profile));
  if (!o.out.empty()) {
    std::cout << "scenario: " << s.name << "\n"
              << "chi_samples: " << s.chi_samples << "\n"
              << "profile: " << (o.simulate ? "simulated" : "closed_form") << "\n"
              << "total_phase: " << sc::format_optional(r.report.total_phase) << "\n"
              << "visibility: " << sc::format_number(r.report.visibility) << "\n"
              << "fitted_phase: " << sc::format_optional(scan.phase) << "\n"
              << "fitted_visibility: " << sc::format_number(scan.visibility) << "\n"
              << "max_scan_deviation: " << sc::format_number(worst) << "\n";
  }
  return 0;
}

int cmd_transport(const Options& o) {
  const sc::Scenario s = load(o);
  emit(o, sc::format_report(s, sc::run_scenario(s)));
  return 0;
}

int cmd_bloch(const Options& o) {
  sc::Scenario s = load(o);
  if (s.path.kind != sc::PathKind::Waypoints || !s.path.closed || !s.state.is_bloch()) {
    throw Error(ErrorCode::DimensionMismatch,
                s.name + ": the bloch table needs a bloch state on a closed waypoint path");
  }
  std::vector<double> radii = !o.radii.empty() ? o.radii
                              : !s.radii.empty() ? s.radii
                                                 : std::vector<double>{0.25, 0.5, 0.9, 1.0};
  std::ostringstream t;
  char line[512];
  std::snprintf(line, sizeof line, "%-6s %-24s %-24s %-24s %-10s %-24s %-24s %s\n", "r",
                "solid_angle", "phase_numeric", "phase_closed", "phase_err", "nu_numeric",
                "nu_closed", "nu_err");
  t << line;
  const sc::Evolution chosen = s.path.evolution;
  for (double r : radii) {
    s.state.r = r;
    s.path.evolution = r == 0.0 ? sc::Evolution::Frame : chosen;
    const sc::RunResult res = sc::run_scenario(s);
    const sc::ClosedForm& c = *res.closed_form;
    const std::optional<double> numeric = res.gamma_g ? res.gamma_g : res.report.total_phase;
    std::string err = "null";
    if (numeric && c.phase) {
      char b[32];
      std::snprintf(b, sizeof b, "%.2e", std::abs(wrap_phase(*numeric - *c.phase)));
      err = b;
    }
    char nerr[32];
    std::snprintf(nerr, sizeof nerr, "%.2e", std::abs(res.report.visibility - c.visibility));
    std::snprintf(line, sizeof line, "%-6.3g %-24s %-24s %-24s %-10s %-24s %-24s %s\n", r,
                  sc::format_number(c.solid_angle).c_str(), sc::format_optional(numeric).c_str(),
                  sc::format_optional(c.phase).c_str(), err.c_str(),
                  sc::format_number(res.report.visibility).c_str(),
                  sc::format_number(c.visibility).c_str(), nerr);
    t << line;
  }
  emit(o, t.str());
  return 0;
}

int cmd_purify_check(const Options& o) {
  const sc::Scenario s = load(o);
  const sc::Pipeline p = sc::build_pipeline(s);
  const UnitaryOperator u = p.path.final_operator();
  const Complex purified = purified_overlap(p.rho0, u);
  const Complex trace = (u.matrix() * p.rho0.matrix()).trace();
  const double check = purified_transport_check(p.rho0, p.path);
  const double def = defect(p.rho0, p.path).global_defect;
  const bool overlap_ok = std::abs(purified - trace) < 1e-12;
  const bool transport_ok = std::abs(check - def) < 1e-9;
  std::ostringstream t;
  t << "scenario: " << s.name << "\n"
    << "purified_overlap: [" << sc::format_number(purified.real()) << ", "
    << sc::format_number(purified.imag()) << "]\n"
    << "trace_overlap: [" << sc::format_number(trace.real()) << ", "
    << sc::format_number(trace.imag()) << "]\n"
    << "overlap_error: " << sc::format_number(std::abs(purified - trace)) << "\n"
    << "overlap_agreement: " << (overlap_ok ? "ok" : "failed") << "\n"
    << "purified_transport_check: " << sc::format_number(check) << "\n"
    << "defect_global: " << sc::format_number(def) << "\n"
    << "transport_check_error: " << sc::format_number(std::abs(check - def)) << "\n"
    << "transport_agreement: " << (transport_ok ? "ok" : "failed") << "\n";
  emit(o, t.str());
  if (!overlap_ok || !transport_ok) {
    std::cerr << "error: ValidationFailed: " << s.name
              << ": purification disagrees with the density-operator route\n";
    return 2;
  }
  return 0;
}

int cmd_validate(const Options& o) {
  std::uint64_t seed = 1;
  int steps = 2000;
  if (!o.scenario_file.empty()) {
    const sc::Scenario s = load(o);
    seed = s.seed;
    steps = s.steps;
  }
  if (o.seed_opt->count()) seed = o.seed;
  if (o.steps_opt->count()) steps = o.steps;
  if (steps < 16) throw Error(ErrorCode::PathTooShort, "--steps must be at least 16");
  const auto cases = validation::transport_cases(seed, steps);
  const std::vector<validation::BatchResult> results = {
      validation::zero_dynamical_phase(cases), validation::route_agreement(cases),
      validation::purification_oracle(seed + 1), validation::interference_consistency(seed + 2)};
  std::ostringstream t;
  bool ok = true;
  for (const auto& r : results) {
    t << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.pass;
  }
  emit(o, t.str());
  if (!ok) {
    std::cerr << "error: ValidationFailed: randomized batch failed (seed " << seed << ")\n";
    return 2;
  }
  return 0;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-state geometric phases: interferometer, transport and holonomy"};
  app.require_subcommand(1);
  // one Options per subcommand: each registers its own flag objects
  Options oi, ot, ob, op, ov;
  auto* interfere = app.add_subcommand("interfere", "chi-scan profile as CSV");
  add_common(interfere, oi);
  interfere->add_flag("--simulate", oi.simulate,
                      "emit the simulated Mach-Zehnder intensities instead of the closed form");
  auto* transport = app.add_subcommand("transport", "evolve along the path and report all phases");
  add_common(transport, ot);
  auto* bloch = app.add_subcommand("bloch", "closed form vs numerics over purity radii");
  add_common(bloch, ob);
  bloch->add_option("--radii", ob.radii, "purity radii to tabulate")->delimiter(',');
  auto* purify = app.add_subcommand("purify-check", "compare against the purified state");
  add_common(purify, op);
  auto* validate = app.add_subcommand("validate", "randomized property batches");
  add_common(validate, ov, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: Usage: " << one_line(e.what()) << "\n";
    return 3;
  }

  try {
    if (*interfere) return cmd_interfere(oi);
    if (*transport) return cmd_transport(ot);
    if (*bloch) return cmd_bloch(ob);
    if (*purify) return cmd_purify_check(op);
    if (*validate) return cmd_validate(ov);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << one_line(e.context()) << "\n";
    return sc::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
