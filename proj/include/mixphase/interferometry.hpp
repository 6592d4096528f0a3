#pragma once

// Mach-Zehnder network acting on (spatial path) x (internal state).
// Index convention on the doubled space: row = path * N + internal, with
// path 0 the |0~> arm (phase shifter e^{i chi}) and path 1 the |1~> arm
// (internal unitary).
//
// Intensities are normalized so that I(chi) = (1 + nu cos(chi - phi)) / 2,
// which is exactly Tr[(|0~><0~| x 1) rho_out] for a unit-trace input.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "mixphase/core.hpp"

namespace mixphase {

inline Matrix mirror() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline Matrix beam_splitter() {
  const double s = 1.0 / std::sqrt(2.0);
  Matrix m(2, 2);
  m << s, s, s, -s;
  return m;
}

inline Matrix phase_shifter(double chi) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = std::polar(1.0, chi);
  m(1, 1) = 1.0;
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// e^{i chi} on the |0~> branch, U_i on the |1~> branch.
inline UnitaryOperator branch_unitary(const UnitaryOperator& u, double chi) {
  const Index n = u.dim();
  Matrix p0 = Matrix::Zero(2, 2);
  Matrix p1 = Matrix::Zero(2, 2);
  p0(0, 0) = std::polar(1.0, chi);
  p1(1, 1) = 1.0;
  return UnitaryOperator::from_matrix(kron(p1, u.matrix()) +
                                      kron(p0, Matrix::Identity(n, n)));
}

/// Output state U_B U_M U U_B rho_in (...)^dagger for rho_in = |0~><0~| x rho0.
inline DensityOperator mach_zehnder_output(const DensityOperator& rho0,
                                           const UnitaryOperator& u, double chi) {
  if (rho0.dim() != u.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "state dimension " + std::to_string(rho0.dim()) +
                    " vs internal unitary dimension " + std::to_string(u.dim()));
  }
  const Index n = rho0.dim();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix bs = kron(beam_splitter(), id);
  const Matrix mm = kron(mirror(), id);
  Matrix in0 = Matrix::Zero(2, 2);
  in0(0, 0) = 1.0;
  const Matrix rho_in = kron(in0, rho0.matrix());
  const Matrix net = bs * mm * branch_unitary(u, chi).matrix() * bs;
  return DensityOperator::from_matrix(net * rho_in * net.adjoint());
}

/// Tr[(|0~><0~| x 1) rho_out].
inline double intensity_along_0(const DensityOperator& rho_out) {
  if (rho_out.dim() % 2 != 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "output state dimension " + std::to_string(rho_out.dim()) + " is odd");
  }
  const Index n = rho_out.dim() / 2;
  return rho_out.matrix().topLeftCorner(n, n).trace().real();
}

/// Tr(U rho0).
inline Complex trace_overlap(const DensityOperator& rho0, const UnitaryOperator& u) {
  if (rho0.dim() != u.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "state dimension " + std::to_string(rho0.dim()) + " vs unitary dimension " +
                    std::to_string(u.dim()));
  }
  return (u.matrix() * rho0.matrix()).trace();
}

struct PhaseVisibility {
  double phase;       // (-pi, pi]
  double visibility;  // [0, 1]
};

/// phi = arg Tr(U rho0), nu = |Tr(U rho0)|. Throws UndefinedPhase at nodal
/// points (nu < phase_tol).
inline PhaseVisibility phase_visibility(const DensityOperator& rho0,
                                        const UnitaryOperator& u,
                                        double phase_tol = tolerance::phase) {
  const Complex t = trace_overlap(rho0, u);
  const double nu = std::min(std::abs(t), 1.0);
  if (nu < phase_tol) {
    throw Error(ErrorCode::UndefinedPhase,
                "visibility " + num(nu) + " below " + num(phase_tol));
  }
  return {principal_arg(t), nu};
}

struct InterferenceProfile {
  std::vector<double> chi;
  std::vector<double> intensity;
  std::optional<double> phase;  // empty at a nodal point
  double visibility = 0.0;
};

/// chi_j = 2 pi j / samples, j = 0 .. samples-1.
inline std::vector<double> uniform_chi_grid(std::size_t samples) {
  std::vector<double> grid(samples);
  for (std::size_t j = 0; j < samples; ++j) {
    grid[j] = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(samples);
  }
  return grid;
}

struct FringeFit {
  std::optional<double> phase;
  double visibility = 0.0;
};

/// Fits I(chi) = a + b cos chi + c sin chi. Three samples are inverted
/// exactly; more samples are solved in the least-squares sense. Returns
/// nu = |b + i c| / a and phi = arg(b + i c).
inline FringeFit fit_fringes(std::span<const double> chi, std::span<const double> intensity,
                             double phase_tol = tolerance::phase) {
  if (chi.size() != intensity.size() || chi.size() < 3) {
    throw Error(ErrorCode::DimensionMismatch,
                "fringe fit needs >= 3 matching samples, got " + std::to_string(chi.size()) +
                    " chi and " + std::to_string(intensity.size()) + " intensities");
  }
  const auto m = static_cast<Index>(chi.size());
  Eigen::MatrixXd design(m, 3);
  Eigen::VectorXd rhs(m);
  for (Index j = 0; j < m; ++j) {
    const double x = chi[static_cast<std::size_t>(j)];
    design(j, 0) = 1.0;
    design(j, 1) = std::cos(x);
    design(j, 2) = std::sin(x);
    rhs(j) = intensity[static_cast<std::size_t>(j)];
  }
  Eigen::Vector3d coef;
  if (m == 3) {
    coef = design.fullPivLu().solve(rhs);
  } else {
    coef = design.colPivHouseholderQr().solve(rhs);
  }
  FringeFit fit;
  const double amp = std::hypot(coef(1), coef(2));
  fit.visibility = coef(0) > 0.0 ? amp / coef(0) : 0.0;
  if (fit.visibility >= phase_tol) fit.phase = principal_arg(Complex(coef(1), coef(2)));
  return fit;
}

/// Simulated chi-scan of the full Mach-Zehnder output, with fitted fringes.
inline InterferenceProfile scan_profile(const DensityOperator& rho0, const UnitaryOperator& u,
                                        std::span<const double> chi_grid,
                                        double phase_tol = tolerance::phase) {
  InterferenceProfile p;
  p.chi.assign(chi_grid.begin(), chi_grid.end());
  p.intensity.reserve(chi_grid.size());
  for (double chi : chi_grid) {
    p.intensity.push_back(intensity_along_0(mach_zehnder_output(rho0, u, chi)));
  }
  const FringeFit fit = fit_fringes(p.chi, p.intensity, phase_tol);
  p.phase = fit.phase;
  p.visibility = fit.visibility;
  return p;
}

/// Closed-form profile (1 + nu cos(chi - phi)) / 2 on a grid.
inline InterferenceProfile fringe_profile(Complex overlap, std::span<const double> chi_grid,
                                          double phase_tol = tolerance::phase) {
  InterferenceProfile p;
  p.visibility = std::abs(overlap);
  if (p.visibility >= phase_tol) p.phase = principal_arg(overlap);
  p.chi.assign(chi_grid.begin(), chi_grid.end());
  for (double chi : chi_grid) {
    p.intensity.push_back(0.5 * (1.0 + (std::polar(1.0, -chi) * overlap).real()));
  }
  return p;
}

struct FringeComponent {
  double visibility;  // nu_k
  double phase;       // phi_k
};

/// Incoherent weighted average of single-state fringes,
/// sum_k w_k (1 + nu_k cos(chi - phi_k)) / 2, together with the collective
/// (phi~, nu~) = (arg, |.|) of sum_k w_k nu_k e^{i phi_k}.
inline InterferenceProfile incoherent_average_profile(std::span<const double> weights,
                                                      std::span<const FringeComponent> states,
                                                      std::span<const double> chi_grid,
                                                      double phase_tol = tolerance::phase) {
  if (weights.size() != states.size() || weights.empty()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(weights.size()) + " weights for " +
                    std::to_string(states.size()) + " fringe components");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= -tolerance::weights)) {
      throw Error(ErrorCode::NonStochasticWeights, "negative weight " + num(w));
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > tolerance::weights) {
    throw Error(ErrorCode::NonStochasticWeights, "weights sum to " + num(sum));
  }
  Complex collective = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    collective += weights[k] * std::polar(states[k].visibility, states[k].phase);
  }
  InterferenceProfile p;
  p.visibility = std::abs(collective);
  if (p.visibility >= phase_tol) p.phase = principal_arg(collective);
  p.chi.assign(chi_grid.begin(), chi_grid.end());
  for (double chi : chi_grid) {
    double value = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      value += weights[k] * (1.0 + states[k].visibility * std::cos(chi - states[k].phase));
    }
    p.intensity.push_back(0.5 * value);
  }
  return p;
}

}  // namespace mixphase
