#pragma once

// Time-ordered unitary evolutions and the parallel-transport machinery:
// generator paths, the projected (parallel-transporting) integrator, the
// rephased eigenframe construction, and finite-difference diagnostics.
//
// Conventions: hbar = 1, dU/dt = -i H(t) U(t), U(0) = 1. A time value that
// appears on two consecutive nodes marks a corner (see detail/calculus.hpp);
// generators may jump there, the unitary path is continuous.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mixphase/core.hpp"
#include "mixphase/detail/calculus.hpp"

namespace mixphase {

namespace detail {

inline void check_grid(const std::vector<double>& times) {
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (!(times[i + 1] >= times[i])) {
      throw Error(ErrorCode::DimensionMismatch,
                  "time grid not increasing at index " + std::to_string(i + 1));
    }
    if (times[i + 1] == times[i] && i + 2 < times.size() && times[i + 2] == times[i]) {
      throw Error(ErrorCode::DimensionMismatch,
                  "time " + num(times[i]) + " repeated more than twice");
    }
  }
}

}  // namespace detail

class GeneratorPath {
 public:
  static GeneratorPath create(std::vector<double> times, std::vector<Matrix> generators) {
    if (times.empty()) throw Error(ErrorCode::EmptyPath, "generator path has no samples");
    if (times.size() != generators.size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  std::to_string(times.size()) + " times for " +
                      std::to_string(generators.size()) + " generators");
    }
    detail::check_grid(times);
    const Index n = generators.front().rows();
    for (std::size_t j = 0; j < generators.size(); ++j) {
      const Matrix& h = generators[j];
      if (h.rows() != n || h.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch,
                    "generator " + std::to_string(j) + " is " + std::to_string(h.rows()) +
                        "x" + std::to_string(h.cols()) + ", expected " + std::to_string(n));
      }
      if (hermiticity_defect(h) > tolerance::hermitian) {
        throw Error(ErrorCode::NonHermitianInput,
                    "generator " + std::to_string(j) + " at t=" + num(times[j]) +
                        " is not Hermitian");
      }
    }
    return GeneratorPath(std::move(times), std::move(generators));
  }

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<Matrix>& generators() const noexcept { return generators_; }
  std::size_t size() const noexcept { return times_.size(); }
  Index dim() const noexcept { return generators_.front().rows(); }

 private:
  GeneratorPath(std::vector<double> t, std::vector<Matrix> g)
      : times_(std::move(t)), generators_(std::move(g)) {}
  std::vector<double> times_;
  std::vector<Matrix> generators_;
};

class UnitaryPath {
 public:
  /// Each sample must be unitary to 1e-10 and the first must be the
  /// identity (to 1e-12; it is then stored as the exact identity).
  static UnitaryPath create(std::vector<double> times, std::vector<Matrix> unitaries) {
    if (times.empty()) throw Error(ErrorCode::EmptyPath, "unitary path has no samples");
    if (times.size() != unitaries.size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  std::to_string(times.size()) + " times for " +
                      std::to_string(unitaries.size()) + " unitaries");
    }
    detail::check_grid(times);
    const Index n = unitaries.front().rows();
    for (std::size_t j = 0; j < unitaries.size(); ++j) {
      const Matrix& u = unitaries[j];
      if (u.rows() != n || u.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch,
                    "unitary " + std::to_string(j) + " has the wrong shape");
      }
      const double d = max_abs(u.adjoint() * u - Matrix::Identity(n, n));
      if (d > tolerance::unitary) {
        throw Error(ErrorCode::NonUnitary, "sample " + std::to_string(j) + " at t=" +
                                               num(times[j]) +
                                               " deviates from unitarity by " +
                                               num(d));
      }
    }
    if (max_abs(unitaries.front() - Matrix::Identity(n, n)) > 1e-12) {
      throw Error(ErrorCode::NonUnitary, "U(0) is not the identity");
    }
    unitaries.front() = Matrix::Identity(n, n);
    return UnitaryPath(std::move(times), std::move(unitaries));
  }

  static UnitaryPath constant(std::vector<double> times, Index n) {
    std::vector<Matrix> u(times.size(), Matrix::Identity(n, n));
    return create(std::move(times), std::move(u));
  }

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<Matrix>& unitaries() const noexcept { return unitaries_; }
  std::size_t size() const noexcept { return times_.size(); }
  Index dim() const noexcept { return unitaries_.front().rows(); }
  const Matrix& final() const noexcept { return unitaries_.back(); }
  UnitaryOperator final_operator() const { return UnitaryOperator::from_matrix(final()); }

 private:
  UnitaryPath(std::vector<double> t, std::vector<Matrix> u)
      : times_(std::move(t)), unitaries_(std::move(u)) {}
  std::vector<double> times_;
  std::vector<Matrix> unitaries_;
};

namespace detail {

inline Matrix remove_frame_diagonal(const Matrix& h, const Matrix& frame) {
  Matrix out = h;
  for (Index k = 0; k < frame.cols(); ++k) {
    const auto ket = frame.col(k);
    const Complex diag = ket.dot(h * ket);  // <k|H|k>
    out.noalias() -= diag.real() * ket * ket.adjoint();
  }
  return 0.5 * (out + out.adjoint());
}

inline Matrix interpolate(const GeneratorPath& gen, std::size_t j, double lambda) {
  return (1.0 - lambda) * gen.generators()[j] + lambda * gen.generators()[j + 1];
}

/// Reorders and rephases `next` so column k is the vector with the largest
/// overlap with column k of `prev` (greedy maximal-overlap assignment).
inline Matrix match_frame(const Matrix& prev, const Matrix& next) {
  const Index n = prev.cols();
  Eigen::MatrixXd overlap = (prev.adjoint() * next).cwiseAbs();
  Matrix out(next.rows(), n);
  std::vector<bool> row_used(static_cast<std::size_t>(n), false);
  std::vector<bool> col_used(static_cast<std::size_t>(n), false);
  for (Index step = 0; step < n; ++step) {
    double best = -1.0;
    Index bi = 0, bj = 0;
    for (Index i = 0; i < n; ++i) {
      if (row_used[static_cast<std::size_t>(i)]) continue;
      for (Index j = 0; j < n; ++j) {
        if (col_used[static_cast<std::size_t>(j)]) continue;
        if (overlap(i, j) > best) {
          best = overlap(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    row_used[static_cast<std::size_t>(bi)] = true;
    col_used[static_cast<std::size_t>(bj)] = true;
    Vector v = next.col(bj);
    const Complex ov = prev.col(bi).dot(v);
    if (std::abs(ov) > 0.0) v *= std::conj(ov) / std::abs(ov);
    out.col(bi) = v;
  }
  return out;
}

}  // namespace detail

/// H' = H - sum_k <k|H|k> |k><k|, so that <k|H'|k> = 0 in the given frame.
inline Matrix project_generator(const Matrix& h, const Matrix& frame) {
  if (h.rows() != h.cols() || frame.rows() != h.rows() || frame.cols() != h.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "generator and frame shapes differ");
  }
  if (hermiticity_defect(h) > tolerance::hermitian) {
    throw Error(ErrorCode::NonHermitianInput,
                "generator hermiticity defect " + num(hermiticity_defect(h)));
  }
  if (orthonormality_defect(frame) > tolerance::orthonormal) {
    throw Error(ErrorCode::NonOrthonormalFrame,
                "frame orthonormality defect " + num(orthonormality_defect(frame)));
  }
  return detail::remove_frame_diagonal(h, frame);
}

/// Time-ordered product of exact exponentials of midpoint generators, with
/// generators linearly interpolated between grid samples. `substeps`
/// exponentials are taken per grid interval; one unitary is stored per grid
/// node.
inline UnitaryPath integrate(const GeneratorPath& gen, int substeps = 1) {
  if (substeps < 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "substeps must be >= 1, got " + std::to_string(substeps));
  }
  const Index n = gen.dim();
  const auto& t = gen.times();
  std::vector<Matrix> out;
  out.reserve(t.size());
  Matrix u = Matrix::Identity(n, n);
  out.push_back(u);
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    const double dt = t[j + 1] - t[j];
    if (dt > 0.0) {
      const double h = dt / substeps;
      for (int s = 0; s < substeps; ++s) {
        const double lambda = (s + 0.5) / substeps;
        u = exp_minus_i(detail::interpolate(gen, j, lambda), h) * u;
      }
      u = reunitarize(u);
    }
    out.push_back(u);
  }
  return UnitaryPath::create(t, std::move(out));
}

/// Parallel-transporting evolution of a non-degenerate rho0 along the state
/// trajectory driven by `gen`. Each substep predicts rho at the midpoint with
/// the raw generator, diagonalizes it, removes the generator's diagonal in
/// that eigenframe and applies the exact exponential. The trajectory of
/// rho(t) is the same as under `gen`; only the phases of U change.
inline UnitaryPath transport_evolution(const DensityOperator& rho0, const GeneratorPath& gen,
                                       int substeps = 1,
                                       double degeneracy_tol = tolerance::degeneracy) {
  if (rho0.dim() != gen.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "state dimension " + std::to_string(rho0.dim()) +
                    " vs generator dimension " + std::to_string(gen.dim()));
  }
  if (substeps < 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "substeps must be >= 1, got " + std::to_string(substeps));
  }
  const SpectralDecomposition spec0 = spectral(rho0, degeneracy_tol);
  const Index n = rho0.dim();
  const auto& t = gen.times();
  std::vector<Matrix> out;
  out.reserve(t.size());
  Matrix u = Matrix::Identity(n, n);
  Matrix frame = spec0.frame;
  out.push_back(u);
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    const double dt = t[j + 1] - t[j];
    if (dt > 0.0) {
      const double h = dt / substeps;
      for (int s = 0; s < substeps; ++s) {
        const double lambda = (s + 0.5) / substeps;
        const Matrix hm = detail::interpolate(gen, j, lambda);
        const Matrix half = exp_minus_i(hm, 0.5 * h) * u;
        Eigen::SelfAdjointEigenSolver<Matrix> es(half * rho0.matrix() * half.adjoint());
        std::vector<double> w(es.eigenvalues().data(),
                              es.eigenvalues().data() + es.eigenvalues().size());
        std::reverse(w.begin(), w.end());
        if (!degenerate_groups(w, degeneracy_tol).empty()) {
          throw DegenerateSpectrumError(
              degenerate_groups(w, degeneracy_tol),
              "eigenvalue crossing at t=" + num(t[j] + lambda * dt));
        }
        frame = detail::match_frame(frame, es.eigenvectors());
        u = exp_minus_i(detail::remove_frame_diagonal(hm, frame), h) * u;
      }
      u = reunitarize(u);
    }
    out.push_back(u);
  }
  return UnitaryPath::create(t, std::move(out));
}

/// U(t) = sum_k |k~(t)><k(0)| built from a supplied eigenframe path (frame
/// vectors as columns, one frame per time node). Each vector is rephased so
/// that consecutive overlaps <k~(t_j)|k~(t_{j+1})> are real positive.
inline UnitaryPath frame_transport(const std::vector<Matrix>& frames,
                                   const std::vector<double>& times) {
  if (frames.empty()) throw Error(ErrorCode::EmptyPath, "frame path has no samples");
  if (frames.size() != times.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(times.size()) +
                                                  " times for " +
                                                  std::to_string(frames.size()) + " frames");
  }
  const Index n = frames.front().rows();
  for (std::size_t j = 0; j < frames.size(); ++j) {
    if (frames[j].rows() != n || frames[j].cols() != n) {
      throw Error(ErrorCode::DimensionMismatch, "frame " + std::to_string(j) +
                                                    " has the wrong shape");
    }
    if (orthonormality_defect(frames[j]) > tolerance::orthonormal) {
      throw Error(ErrorCode::NonOrthonormalFrame,
                  "frame " + std::to_string(j) + " at t=" + num(times[j]) +
                      " has orthonormality defect " +
                      num(orthonormality_defect(frames[j])));
    }
  }
  const Matrix f0 = frames.front();
  Matrix current = f0;
  std::vector<Matrix> out;
  out.reserve(frames.size());
  out.push_back(Matrix::Identity(n, n));
  for (std::size_t j = 1; j < frames.size(); ++j) {
    Matrix next = frames[j];
    for (Index k = 0; k < n; ++k) {
      const Complex ov = current.col(k).dot(next.col(k));
      if (!(std::abs(ov) > 0.9)) {
        throw Error(ErrorCode::FrameDiscontinuity,
                    "vector " + std::to_string(k) + " between t=" +
                        num(times[j - 1]) + " and t=" + num(times[j]) +
                        " has overlap " + num(std::abs(ov)));
      }
      next.col(k) *= std::conj(ov) / std::abs(ov);
    }
    current = next;
    out.push_back(current * f0.adjoint());
  }
  return UnitaryPath::create(times, std::move(out));
}

struct TransportDefect {
  double global_defect = 0.0;        // max_t |Tr[rho(t) dU/dt U^dagger]|
  std::vector<double> eigen_defects;  // max_t |<k(t)| dU/dt U^dagger |k(t)>|
};

namespace detail {

/// U^dagger(t) dU/dt at every node, dU/dt from finite differences.
inline std::vector<Matrix> left_velocity(const UnitaryPath& path) {
  const std::vector<Matrix> du =
      differentiate<Matrix>(path.times(), path.unitaries());
  std::vector<Matrix> v(du.size());
  for (std::size_t j = 0; j < du.size(); ++j) v[j] = path.unitaries()[j].adjoint() * du[j];
  return v;
}

inline void check_dims(const DensityOperator& rho0, const UnitaryPath& path) {
  if (rho0.dim() != path.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "state dimension " + std::to_string(rho0.dim()) + " vs path dimension " +
                    std::to_string(path.dim()));
  }
}

}  // namespace detail

/// Finite-difference check of Tr[rho U' U^dagger] = 0 and of the per-vector
/// conditions. `frame` defaults to rho0's eigenframe; when given (needed for
/// degenerate rho0) the weights are its diagonal <k|rho0|k>.
inline TransportDefect defect(const DensityOperator& rho0, const UnitaryPath& path,
                              const std::optional<Matrix>& frame = std::nullopt) {
  detail::check_dims(rho0, path);
  const Matrix f = frame ? *frame : eigen_decompose(rho0).frame;
  const std::vector<Matrix> vel = detail::left_velocity(path);
  TransportDefect out;
  out.eigen_defects.assign(static_cast<std::size_t>(f.cols()), 0.0);
  for (const Matrix& v : vel) {
    // Tr[rho(t) U' U^dagger] = Tr[rho0 U^dagger U']
    out.global_defect = std::max(out.global_defect, std::abs((rho0.matrix() * v).trace()));
    for (Index k = 0; k < f.cols(); ++k) {
      auto& e = out.eigen_defects[static_cast<std::size_t>(k)];
      e = std::max(e, std::abs(f.col(k).dot(v * f.col(k))));
    }
  }
  return out;
}

/// gamma_d = -i int Tr[rho0 U^dagger U'] dt (trapezoidal; the vanishing
/// imaginary part is dropped).
inline double dynamical_phase(const DensityOperator& rho0, const UnitaryPath& path) {
  detail::check_dims(rho0, path);
  const std::vector<Matrix> vel = detail::left_velocity(path);
  std::vector<double> integrand(vel.size());
  for (std::size_t j = 0; j < vel.size(); ++j) {
    integrand[j] = (Complex(0.0, -1.0) * (rho0.matrix() * vel[j]).trace()).real();
  }
  return detail::trapezoid<double>(path.times(), integrand);
}

}  // namespace mixphase
