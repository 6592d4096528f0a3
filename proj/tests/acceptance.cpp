// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mixphase/bloch.hpp"
#include "mixphase/holonomy.hpp"
#include "mixphase/interferometry.hpp"
#include "mixphase/scenario.hpp"
#include "mixphase/transport.hpp"
#include "mixphase/validation.hpp"
#include "test_paths.hpp"

namespace {

using namespace mixphase;
using namespace mixphase::testing::paths;
namespace sc = mixphase::scenario;
namespace fs = std::filesystem;
using validation::sci;

struct Outcome {
  bool pass;
  std::string detail;
};

// Girard: a geodesic triangle with three right angles has excess pi/2; the
// orientation comes from the triple product of its vertices.
double octant_excess_oracle() {
  const Vec3 a = Vec3::UnitZ(), b = Vec3::UnitX(), c = Vec3::UnitY();
  const double excess = 3 * (kPi / 2) - kPi;
  return a.dot(b.cross(c)) > 0 ? excess : -excess;
}

struct OctantRun {
  double phase;
  double visibility;
};

// Geodesic drive around the octant, parallel transport integrator, trace route.
OctantRun run_octant(double r, int steps_per_arc) {
  const bloch::GeodesicDrive d = bloch::geodesic_generator_path(octant(steps_per_arc), r);
  const UnitaryPath u = transport_evolution(d.initial, d.generators);
  const PhaseReport rep = phase_report(d.initial, u, {}, d.frames.front());
  if (!rep.gamma_g_trace.value) throw Error(ErrorCode::UndefinedPhase, rep.gamma_g_trace.status);
  return {*rep.gamma_g_trace.value, rep.visibility};
}

Outcome pure_state_reduction() {
  const double omega = octant_excess_oracle();
  const OctantRun run = run_octant(1.0, 2000);
  const double err = std::abs(wrap_phase(run.phase - (-omega / 2)));
  return {err < 1e-5, "Omega " + sci(omega) + ", gamma_g " + sci(run.phase) + ", |gamma_g + Omega/2| " +
                          sci(err)};
}

Outcome mixed_closed_form() {
  const double omega = octant_excess_oracle();
  bool ok = true;
  double worst_phase = 0.0, worst_nu = 0.0;
  for (double r : {0.25, 0.5, 0.9}) {
    const OctantRun run = run_octant(r, 2000);
    const double want_phase = std::arg(Complex(std::cos(omega / 2), -r * std::sin(omega / 2)));
    const double want_nu =
        std::sqrt(std::pow(std::cos(omega / 2), 2) + r * r * std::pow(std::sin(omega / 2), 2));
    const double ep = std::abs(wrap_phase(run.phase - want_phase));
    const double en = std::abs(run.visibility - want_nu);
    worst_phase = std::max(worst_phase, ep);
    worst_nu = std::max(worst_nu, en);
    ok = ok && ep < 1e-5 && en < 1e-5;
  }
  return {ok, "r in {0.25, 0.5, 0.9}, max phase error " + sci(worst_phase) +
                  ", max visibility error " + sci(worst_nu)};
}

Outcome unpolarized_sign_flip() {
  const auto path = bloch::SpherePath::create(
      {Vec3::UnitZ(), Vec3::UnitX(), -Vec3::UnitZ(), -Vec3::UnitX()}, true, 500);
  const bloch::GeodesicDrive d = bloch::geodesic_generator_path(path, 0.0);
  const UnitaryPath u = frame_transport(d.frames, d.generators.times());
  const double phi = geometric_phase_trace(d.initial, u, 1e-6, tolerance::phase, d.frames.front());
  const double phase_err = std::abs(wrap_phase(phi - kPi));
  const std::vector<double> grid = uniform_chi_grid(64);
  const InterferenceProfile closed = fringe_profile((d.initial.matrix() * u.final()).trace(), grid);
  const InterferenceProfile scan = scan_profile(d.initial, u.final_operator(), grid);
  double worst = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double want = 0.5 * (1 - std::cos(grid[j]));
    worst = std::max({worst, std::abs(closed.intensity[j] - want), std::abs(scan.intensity[j] - want)});
  }
  return {phase_err < 1e-6 && worst < 1e-9,
          "phi " + sci(phi) + ", |phi - pi| " + sci(phase_err) + ", max profile error " + sci(worst)};
}

Outcome from_batch(const validation::BatchResult& b) { return {b.pass, b.detail}; }

Outcome convergence_order() {
  struct Case {
    double r, theta;
  };
  const Case cases[] = {{1.0, kPi / 3}, {0.6, 50 * kPi / 180}, {0.3, 0.4 * kPi}};
  bool ok = true;
  std::string detail = "steps 256 -> 512, ratios";
  for (const Case& c : cases) {
    double err[2];
    for (int i = 0; i < 2; ++i) {
      const Precession p = latitude_precession(c.r, c.theta, 256 << i);
      const UnitaryPath u = transport_evolution(p.rho0, p.gen);
      const double g = geometric_phase_trace(p.rho0, u, 1e-3);
      err[i] = std::abs(wrap_phase(g - bloch::qubit_phase_closed_form(c.r, p.omega)));
    }
    const double ratio = err[0] / err[1];
    ok = ok && ratio >= 3.5 && ratio <= 4.5;
    char buf[64];
    std::snprintf(buf, sizeof buf, " %.3f", ratio);
    detail += buf;
  }
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("mixphase_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::size_t files = 0, mismatches = 0;
  for (const auto& entry : fs::directory_iterator(MIXPHASE_SCENARIO_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    const std::string stem = entry.path().stem().string();
    for (int run = 0; run < 2; ++run) {
      const sc::Scenario s = sc::load_scenario(entry.path());
      const sc::RunResult r = sc::run_scenario(s);
      const std::string tag = "." + std::to_string(run);
      sc::write_atomically(dir / (stem + ".report" + tag), sc::format_report(s, r));
      sc::write_atomically(dir / (stem + ".csv" + tag), sc::format_profile_csv(r.profile));
    }
    for (const char* kind : {".report", ".csv"}) {
      ++files;
      if (slurp(dir / (stem + kind + ".0")) != slurp(dir / (stem + kind + ".1"))) ++mismatches;
    }
  }
  fs::remove_all(dir);
  return {files > 0 && mismatches == 0,
          std::to_string(files) + " outputs compared, " + std::to_string(mismatches) + " differ"};
}

}  // namespace

int main() {
  const std::uint64_t seed = 20240611;
  std::vector<validation::TransportCase> cases;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"pure-state reduction", pure_state_reduction},
      {"mixed closed form", mixed_closed_form},
      {"unpolarized sign flip", unpolarized_sign_flip},
      {"zero dynamical phase",
       [&] {
         cases = validation::transport_cases(seed, 2000);
         return from_batch(validation::zero_dynamical_phase(cases));
       }},
      {"three-route agreement", [&] { return from_batch(validation::route_agreement(cases)); }},
      {"purification oracle", [&] { return from_batch(validation::purification_oracle(seed + 1)); }},
      {"interference consistency",
       [&] { return from_batch(validation::interference_consistency(seed + 2, 64)); }},
      {"convergence order", convergence_order},
      {"determinism", determinism},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    Outcome o{false, ""};
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.c_str());
    if (!o.pass) ++failed;
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return failed ? 1 : 0;
}
