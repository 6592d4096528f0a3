#pragma once

// Geometric phase of a parallel-transported mixed state, by three routes:
//   trace       arg Tr[rho0 U(tau)]
//   integral    int i Tr[rho0 W^dagger dW/dt] dt, with the reference gauge
//               W(t) = Tr[rho0 U^dagger] / |Tr[rho0 U^dagger]| U(t)
//   connection  sum_k w_k int i <chi_k|d chi_k/dt> dt, |chi_k(t)> = W(t)|k>
// plus the pure-state phase of a path of kets.

#include <optional>
#include <string>
#include <vector>

#include "mixphase/core.hpp"
#include "mixphase/detail/calculus.hpp"
#include "mixphase/interferometry.hpp"
#include "mixphase/transport.hpp"

namespace mixphase {

struct HolonomyOptions {
  double transport_tol = 1e-6;
  double integral_tol = 1e-5;
  double phase_tol = tolerance::phase;
  double degeneracy_tol = tolerance::degeneracy;
};

/// arg Tr[rho0 U(tau)], refused unless the path is parallel transporting.
inline double geometric_phase_trace(const DensityOperator& rho0, const UnitaryPath& path,
                                    double transport_tol = 1e-6,
                                    double phase_tol = tolerance::phase,
                                    const std::optional<Matrix>& frame = std::nullopt) {
  const TransportDefect d = defect(rho0, path, frame);
  if (!(d.global_defect < transport_tol)) {
    throw Error(ErrorCode::NotParallelTransported,
                "transport defect " + num(d.global_defect) + " exceeds " +
                    num(transport_tol));
  }
  const Complex t = (rho0.matrix() * path.final()).trace();
  if (std::abs(t) < phase_tol) {
    throw Error(ErrorCode::UndefinedPhase,
                "|Tr[rho0 U(tau)]| = " + num(std::abs(t)) + " below " +
                    num(phase_tol));
  }
  return principal_arg(t);
}

/// W(t) at every node. Throws NodalPointError at the first node where
/// |Tr[rho0 U^dagger(t)]| < phase_tol.
inline std::vector<Matrix> reference_gauge(const DensityOperator& rho0,
                                           const UnitaryPath& path,
                                           double phase_tol = tolerance::phase) {
  detail::check_dims(rho0, path);
  std::vector<Matrix> w;
  w.reserve(path.size());
  for (std::size_t j = 0; j < path.size(); ++j) {
    const Matrix& u = path.unitaries()[j];
    const Complex t = (rho0.matrix() * u.adjoint()).trace();
    if (std::abs(t) < phase_tol) {
      throw NodalPointError(j, path.times()[j],
                            "|Tr[rho0 U^dagger]| = " + num(std::abs(t)) +
                                " at t=" + num(path.times()[j]) + " (node " +
                                std::to_string(j) + ")");
    }
    w.push_back((t / std::abs(t)) * u);
  }
  return w;
}

namespace detail {

/// Trapezoidal integral of a real integrand, refusing any single step whose
/// increment reaches pi/4 (the accumulated phase would be branch-ambiguous).
inline double accumulate_phase(std::span<const double> t, std::span<const double> f) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double inc = 0.5 * (t[i + 1] - t[i]) * (f[i] + f[i + 1]);
    if (std::abs(inc) >= kPi / 4.0) {
      throw Error(ErrorCode::StepTooCoarse,
                  "phase increment " + num(inc) + " between t=" +
                      num(t[i]) + " and t=" + num(t[i + 1]));
    }
    sum += inc;
  }
  return sum;
}

}  // namespace detail

/// Line integral of the gauge potential i Tr[rho0 W^dagger dW] along the path.
inline double geometric_phase_integral(const DensityOperator& rho0, const UnitaryPath& path,
                                       double phase_tol = tolerance::phase) {
  detail::smooth_segments(path.times());
  const std::vector<Matrix> w = reference_gauge(rho0, path, phase_tol);
  const std::vector<Matrix> dw = detail::differentiate<Matrix>(path.times(), w);
  std::vector<double> integrand(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    integrand[j] =
        (Complex(0.0, 1.0) * (rho0.matrix() * w[j].adjoint() * dw[j]).trace()).real();
  }
  return detail::accumulate_phase(path.times(), integrand);
}

struct AverageConnection {
  std::vector<double> weights;      // w_k
  std::vector<double> integrals;    // int Omega_k
  double weighted_sum = 0.0;        // sum_k w_k int Omega_k
};

/// Per-eigenstate connection integrals along the reference sections
/// W(t)|k>. Needs a unique eigenframe of rho0 unless `frame` is given.
inline AverageConnection average_connection(const DensityOperator& rho0,
                                            const UnitaryPath& path,
                                            const std::optional<Matrix>& frame = std::nullopt,
                                            double phase_tol = tolerance::phase,
                                            double degeneracy_tol = tolerance::degeneracy) {
  detail::smooth_segments(path.times());
  Matrix f;
  AverageConnection out;
  if (frame) {
    f = *frame;
    for (Index k = 0; k < f.cols(); ++k) {
      out.weights.push_back(f.col(k).dot(rho0.matrix() * f.col(k)).real());
    }
  } else {
    const SpectralDecomposition s = spectral(rho0, degeneracy_tol);
    f = s.frame;
    out.weights = s.weights;
  }
  const std::vector<Matrix> w = reference_gauge(rho0, path, phase_tol);
  for (Index k = 0; k < f.cols(); ++k) {
    std::vector<Vector> section(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) section[j] = w[j] * f.col(k);
    const std::vector<Vector> dsection = detail::differentiate<Vector>(path.times(), section);
    std::vector<double> integrand(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
      integrand[j] = (Complex(0.0, 1.0) * section[j].dot(dsection[j])).real();
    }
    const double omega_k = detail::trapezoid<double>(path.times(), integrand);
    out.integrals.push_back(omega_k);
    out.weighted_sum += out.weights[static_cast<std::size_t>(k)] * omega_k;
  }
  return out;
}

/// Phase of a pure-state path: arg<psi(0)|psi(tau)> when the path is already
/// parallel (every consecutive overlap real positive to 1e-9), otherwise the
/// gauge-invariant form arg[<psi(0)|psi(tau)> prod_j <psi(t_{j+1})|psi(t_j)>].
inline double pure_state_phase(const std::vector<Vector>& states,
                               double phase_tol = tolerance::phase) {
  if (states.size() < 2) {
    throw Error(ErrorCode::PathTooShort, "need at least two states");
  }
  const Complex endpoints = states.front().dot(states.back());
  if (std::abs(endpoints) < phase_tol) {
    throw Error(ErrorCode::OrthogonalEndpoints,
                "|<psi(0)|psi(tau)>| = " + num(std::abs(endpoints)));
  }
  double twist = 0.0;
  bool parallel = true;
  for (std::size_t j = 0; j + 1 < states.size(); ++j) {
    const Complex ov = states[j + 1].dot(states[j]);
    if (std::abs(ov) < phase_tol) {
      throw Error(ErrorCode::FrameDiscontinuity,
                  "consecutive states " + std::to_string(j) + " and " +
                      std::to_string(j + 1) + " are orthogonal");
    }
    const double a = principal_arg(ov);
    parallel = parallel && std::abs(a) < 1e-9;
    twist += a;
  }
  const double base = principal_arg(endpoints);
  return parallel ? base : wrap_phase(base + twist);
}

struct EigenstateFactor {
  double weight;                // w_k
  double visibility;            // nu_k = |<k|U(tau)|k>|
  std::optional<double> phase;  // beta_k = arg<k|U(tau)|k>
};

/// Value of one route, or the reason it is unavailable for this path.
struct RouteValue {
  std::optional<double> value;
  std::string status = "ok";
};

struct PhaseReport {
  std::optional<double> total_phase;  // arg Tr[rho0 U(tau)], empty at a node
  double visibility = 0.0;
  double gamma_d = 0.0;
  RouteValue gamma_g_trace;
  RouteValue gamma_g_integral;
  RouteValue gamma_g_connection;
  std::optional<double> route_gap;  // wrap(trace - integral) when both exist
  std::vector<EigenstateFactor> per_eigenstate;
  TransportDefect defect;
};

namespace detail {

template <typename F>
RouteValue run_route(F&& f) {
  RouteValue r;
  try {
    r.value = f();
  } catch (const Error& e) {
    if (!is_numerical_abort(e.code())) throw;
    r.status = e.what();
  }
  return r;
}

}  // namespace detail

/// Evaluates every route on one path. Numerical aborts of individual routes
/// (nodal points, missing parallel transport) are recorded, not thrown.
inline PhaseReport phase_report(const DensityOperator& rho0, const UnitaryPath& path,
                                const HolonomyOptions& opt = {},
                                const std::optional<Matrix>& frame = std::nullopt) {
  detail::check_dims(rho0, path);
  PhaseReport r;
  const Matrix f = frame ? *frame : eigen_decompose(rho0, opt.degeneracy_tol).frame;
  const Complex t = (rho0.matrix() * path.final()).trace();
  r.visibility = std::abs(t);
  if (r.visibility >= opt.phase_tol) r.total_phase = principal_arg(t);
  r.defect = defect(rho0, path, f);
  r.gamma_d = dynamical_phase(rho0, path);
  for (Index k = 0; k < f.cols(); ++k) {
    const Complex ov = f.col(k).dot(path.final() * f.col(k));
    EigenstateFactor e{f.col(k).dot(rho0.matrix() * f.col(k)).real(), std::abs(ov), {}};
    if (e.visibility >= opt.phase_tol) e.phase = principal_arg(ov);
    r.per_eigenstate.push_back(e);
  }
  r.gamma_g_trace = detail::run_route([&] {
    return geometric_phase_trace(rho0, path, opt.transport_tol, opt.phase_tol, f);
  });
  r.gamma_g_integral =
      detail::run_route([&] { return geometric_phase_integral(rho0, path, opt.phase_tol); });
  r.gamma_g_connection = detail::run_route([&] {
    return average_connection(rho0, path, frame, opt.phase_tol, opt.degeneracy_tol)
        .weighted_sum;
  });
  if (r.gamma_g_trace.value && r.gamma_g_integral.value) {
    r.route_gap = wrap_phase(*r.gamma_g_trace.value - *r.gamma_g_integral.value);
  }
  return r;
}

}  // namespace mixphase
