#pragma once

// Randomized property batches: transported paths have no dynamical phase,
// the three geometric-phase routes agree, the purification reproduces the
// trace overlap, and the simulated interferometer reproduces arg/|Tr(U rho)|.
// Shared by `mixphase validate` and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "mixphase/core.hpp"
#include "mixphase/holonomy.hpp"
#include "mixphase/interferometry.hpp"
#include "mixphase/purification.hpp"
#include "mixphase/random.hpp"
#include "mixphase/transport.hpp"

namespace mixphase::validation {

struct BatchResult {
  std::string name;
  bool pass = true;
  std::string detail;
};

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

/// H(t) = A + t B + sin(pi t) C on [0, 1], A, B, C random Hermitian.
inline GeneratorPath smooth_random_generators(Index n, random::Engine& rng, int steps) {
  const Matrix a = random::hermitian(n, rng, 1.0);
  const Matrix b = random::hermitian(n, rng, 1.0);
  const Matrix c = random::hermitian(n, rng, 0.5);
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  std::vector<Matrix> h(t.size());
  for (int j = 0; j <= steps; ++j) {
    const double x = static_cast<double>(j) / steps;
    t[static_cast<std::size_t>(j)] = x;
    h[static_cast<std::size_t>(j)] = a + x * b + std::sin(kPi * x) * c;
  }
  return GeneratorPath::create(std::move(t), std::move(h));
}

struct TransportCase {
  DensityOperator rho0;
  UnitaryPath path;
};

/// 20 qubit and 10 qutrit states, each driven along its own smooth random
/// generator path with the parallel-transport integrator.
inline std::vector<TransportCase> transport_cases(std::uint64_t seed, int steps,
                                                  int substeps = 1) {
  random::Engine rng(seed);
  std::vector<TransportCase> out;
  for (int i = 0; i < 30; ++i) {
    const Index n = i < 20 ? 2 : 3;
    DensityOperator rho = random::density(n, rng, 0.05);
    const GeneratorPath gen = smooth_random_generators(n, rng, steps);
    out.push_back({rho, transport_evolution(rho, gen, substeps)});
  }
  return out;
}

inline BatchResult zero_dynamical_phase(const std::vector<TransportCase>& cases) {
  BatchResult r{"zero dynamical phase", true, ""};
  double worst_gd = 0.0, worst_defect = 0.0;
  for (const TransportCase& c : cases) {
    worst_gd = std::max(worst_gd, std::abs(dynamical_phase(c.rho0, c.path)));
    worst_defect = std::max(worst_defect, defect(c.rho0, c.path).global_defect);
  }
  r.pass = worst_gd < 1e-6 && worst_defect < 1e-6;
  r.detail = std::to_string(cases.size()) + " paths, max |gamma_d| " + sci(worst_gd) +
             ", max defect " + sci(worst_defect);
  return r;
}

/// Smallest |Tr[rho0 U^dagger(t)]| on the grid.
inline double min_visibility(const DensityOperator& rho0, const UnitaryPath& path) {
  double m = 1.0;
  for (const Matrix& u : path.unitaries()) {
    m = std::min(m, std::abs((rho0.matrix() * u.adjoint()).trace()));
  }
  return m;
}

inline BatchResult route_agreement(const std::vector<TransportCase>& cases) {
  BatchResult r{"three-route agreement", true, ""};
  double worst_gap = 0.0, worst_conn = 0.0;
  std::size_t used = 0, aborted = 0;
  std::string first_abort;
  for (const TransportCase& c : cases) {
    if (min_visibility(c.rho0, c.path) <= 1e-3) continue;
    ++used;
    try {
      const double trace = geometric_phase_trace(c.rho0, c.path);
      const double integral = geometric_phase_integral(c.rho0, c.path);
      const double conn = average_connection(c.rho0, c.path).weighted_sum;
      worst_gap = std::max(worst_gap, std::abs(wrap_phase(trace - integral)));
      worst_conn = std::max(worst_conn, std::abs(integral - conn));
    } catch (const Error& e) {
      if (!is_numerical_abort(e.code())) throw;
      if (first_abort.empty()) first_abort = e.what();
      ++aborted;
    }
  }
  r.pass = used > 0 && aborted == 0 && worst_gap < 1e-5 && worst_conn < 1e-9;
  r.detail = std::to_string(used) + "/" + std::to_string(cases.size()) +
             " paths with nu > 1e-3, max |trace - integral| " + sci(worst_gap) +
             ", max |integral - connection| " + sci(worst_conn);
  if (aborted) r.detail += "; " + std::to_string(aborted) + " refused (" + first_abort + ")";
  return r;
}

inline BatchResult purification_oracle(std::uint64_t seed, int steps = 400) {
  BatchResult r{"purification oracle", true, ""};
  random::Engine rng(seed);
  double worst_overlap = 0.0, worst_check = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Index n = 2 + i % 3;
    const DensityOperator rho = random::density(n, rng);
    const UnitaryOperator u = random::haar_unitary(n, rng);
    worst_overlap = std::max(
        worst_overlap, std::abs(purified_overlap(rho, u) - (u.matrix() * rho.matrix()).trace()));
    // the transport check is compared on an unprojected path, where both
    // sides are far from zero
    const UnitaryPath p = integrate(smooth_random_generators(n, rng, steps));
    worst_check = std::max(worst_check, std::abs(purified_transport_check(rho, p) -
                                                 defect(rho, p).global_defect));
  }
  r.pass = worst_overlap < 1e-12 && worst_check < 1e-9;
  r.detail = "50 pairs, max |<Psi(0)|Psi(t)> - Tr(U rho0)| " + sci(worst_overlap) +
             ", max |purified check - defect| " + sci(worst_check);
  return r;
}

inline BatchResult interference_consistency(std::uint64_t seed, std::size_t chi_samples = 64) {
  BatchResult r{"interference consistency", true, ""};
  random::Engine rng(seed);
  const std::vector<double> grid = uniform_chi_grid(chi_samples);
  double worst_trace = 0.0, worst_average = 0.0;
  for (int i = 0; i < 30; ++i) {
    const Index n = 2 + i % 3;
    const DensityOperator rho = random::density(n, rng);
    const UnitaryOperator u = random::haar_unitary(n, rng);
    const InterferenceProfile scan = scan_profile(rho, u, grid);
    const PhaseVisibility pv = phase_visibility(rho, u);
    const SpectralDecomposition s = eigen_decompose(rho);
    std::vector<FringeComponent> comps;
    for (std::size_t k = 0; k < s.weights.size(); ++k) {
      const Complex f = s.ket(k).dot(u.matrix() * s.ket(k));
      comps.push_back({std::abs(f), principal_arg(f)});
    }
    const InterferenceProfile avg = incoherent_average_profile(s.weights, comps, grid);
    if (!scan.phase || !avg.phase) {
      r.pass = false;
      continue;
    }
    worst_trace = std::max({worst_trace, std::abs(wrap_phase(*scan.phase - pv.phase)),
                            std::abs(scan.visibility - pv.visibility)});
    worst_average = std::max({worst_average, std::abs(wrap_phase(*scan.phase - *avg.phase)),
                              std::abs(scan.visibility - avg.visibility)});
    for (std::size_t j = 0; j < grid.size(); ++j) {
      worst_average = std::max(worst_average, std::abs(scan.intensity[j] - avg.intensity[j]));
    }
  }
  r.pass = r.pass && worst_trace < 1e-9 && worst_average < 1e-9;
  r.detail = "30 pairs, " + std::to_string(chi_samples) + "-point scan, max fit error vs trace " +
             sci(worst_trace) + ", vs weighted average " + sci(worst_average);
  return r;
}

}  // namespace mixphase::validation
