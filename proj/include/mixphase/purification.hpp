#pragma once

// Canonical purification |Psi> = sum_k sqrt(w_k) |k>_s |k>_a with an ancilla
// of the same dimension. The state is stored as its amplitude matrix
// A(s, a) = <s, a|Psi>, so the reduced system state is A A^dagger and a local
// unitary U x 1 acts as A -> U A.

#include <cmath>
#include <vector>

#include "mixphase/core.hpp"
#include "mixphase/detail/calculus.hpp"
#include "mixphase/transport.hpp"

namespace mixphase {

class PurifiedState {
 public:
  explicit PurifiedState(Matrix amplitudes) : amplitudes_(std::move(amplitudes)) {}

  const Matrix& amplitudes() const noexcept { return amplitudes_; }
  Index system_dim() const noexcept { return amplitudes_.rows(); }
  Index ancilla_dim() const noexcept { return amplitudes_.cols(); }

  double norm() const { return amplitudes_.norm(); }
  Matrix reduced_system() const { return amplitudes_ * amplitudes_.adjoint(); }

  PurifiedState evolve_local(const UnitaryOperator& u) const {
    if (u.dim() != system_dim()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "system dimension " + std::to_string(system_dim()) +
                      " vs unitary dimension " + std::to_string(u.dim()));
    }
    return PurifiedState(u.matrix() * amplitudes_);
  }

  /// <this|other>
  Complex overlap(const PurifiedState& other) const {
    return (amplitudes_.adjoint() * other.amplitudes_).trace();
  }

 private:
  Matrix amplitudes_;
};

inline PurifiedState purify(const DensityOperator& rho0) {
  const SpectralDecomposition s = eigen_decompose(rho0);
  Matrix a(rho0.dim(), rho0.dim());
  for (Index k = 0; k < rho0.dim(); ++k) {
    a.col(k) = std::sqrt(s.weights[static_cast<std::size_t>(k)]) * s.frame.col(k);
  }
  return PurifiedState(std::move(a));
}

/// <Psi(0)|(U x 1)|Psi(0)>, which equals Tr(U rho0).
inline Complex purified_overlap(const DensityOperator& rho0, const UnitaryOperator& u) {
  const PurifiedState psi = purify(rho0);
  return psi.overlap(psi.evolve_local(u));
}

/// max_t |<Psi(t)|dPsi/dt>| on the purified trajectory, with the time
/// derivative taken by finite differences of the amplitudes.
inline double purified_transport_check(const DensityOperator& rho0, const UnitaryPath& path) {
  detail::check_dims(rho0, path);
  const Matrix a0 = purify(rho0).amplitudes();
  std::vector<Matrix> amps(path.size());
  for (std::size_t j = 0; j < path.size(); ++j) amps[j] = path.unitaries()[j] * a0;
  const std::vector<Matrix> damps = detail::differentiate<Matrix>(path.times(), amps);
  double worst = 0.0;
  for (std::size_t j = 0; j < amps.size(); ++j) {
    worst = std::max(worst, std::abs((amps[j].adjoint() * damps[j]).trace()));
  }
  return worst;
}

}  // namespace mixphase
