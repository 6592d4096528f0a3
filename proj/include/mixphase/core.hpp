#pragma once

// Dense density operators, unitaries and their spectral decompositions.
// Everything downstream (interferometer, transport, holonomy) is written
// against these types.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mixphase/errors.hpp"

namespace mixphase {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double kPi = std::numbers::pi;

namespace tolerance {
inline constexpr double hermitian = 1e-12;
inline constexpr double trace = 1e-12;
inline constexpr double positivity = 1e-12;
inline constexpr double weights = 1e-10;
inline constexpr double orthonormal = 1e-10;
inline constexpr double unitary = 1e-10;
inline constexpr double degeneracy = 1e-8;
inline constexpr double phase = 1e-9;
}  // namespace tolerance

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Maps an angle onto (-pi, pi].
inline double wrap_phase(double angle) {
  double w = std::remainder(angle, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

/// arg(z) on (-pi, pi]; std::arg can return -pi for a negative-zero
/// imaginary part.
inline double principal_arg(Complex z) {
  double a = std::atan2(z.imag(), z.real());
  return a <= -kPi ? a + 2.0 * kPi : a;
}

inline double hermiticity_defect(const Matrix& m) {
  return max_abs(m - m.adjoint());
}

inline double orthonormality_defect(const Matrix& frame) {
  const Index n = frame.cols();
  return max_abs(frame.adjoint() * frame - Matrix::Identity(n, n));
}

/// Rephases a vector so its largest-magnitude component is real positive.
/// Ties within 1e-12 go to the lowest index so the choice is reproducible.
inline void apply_phase_convention(Eigen::Ref<Vector> v) {
  if (v.size() == 0) return;
  const double top = v.cwiseAbs().maxCoeff();
  if (top == 0.0) return;
  Index pick = 0;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= top - 1e-12) {
      pick = i;
      break;
    }
  }
  v *= std::conj(v(pick)) / std::abs(v(pick));
  v(pick) = Complex(v(pick).real(), 0.0);
}

class DensityOperator {
 public:
  /// Validates Hermiticity, unit trace and positivity; the stored matrix is
  /// the Hermitian part of the input.
  static DensityOperator from_matrix(const Matrix& m) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "density matrix must be square and non-empty, got " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    if (hermiticity_defect(m) > tolerance::hermitian) {
      throw Error(ErrorCode::NonHermitianInput,
                  "density matrix is not Hermitian (defect " +
                      num(hermiticity_defect(m)) + ")");
    }
    Matrix h = 0.5 * (m + m.adjoint());
    const double tr = h.trace().real();
    if (std::abs(tr - 1.0) > tolerance::trace) {
      throw Error(ErrorCode::InvalidDensity,
                  "trace is " + num(tr) + ", expected 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tolerance::positivity) {
      throw Error(ErrorCode::InvalidDensity,
                  "negative eigenvalue " + num(es.eigenvalues().minCoeff()));
    }
    return DensityOperator(std::move(h));
  }

  const Matrix& matrix() const noexcept { return matrix_; }
  Index dim() const noexcept { return matrix_.rows(); }

 private:
  explicit DensityOperator(Matrix m) : matrix_(std::move(m)) {}
  Matrix matrix_;
};

class UnitaryOperator {
 public:
  static UnitaryOperator from_matrix(const Matrix& m) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "unitary must be square and non-empty, got " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    const double d = max_abs(m.adjoint() * m - Matrix::Identity(m.rows(), m.cols()));
    if (d > tolerance::unitary) {
      throw Error(ErrorCode::NonUnitary, "U^dagger U deviates from identity by " +
                                             num(d));
    }
    return UnitaryOperator(m);
  }

  static UnitaryOperator identity(Index n) {
    return UnitaryOperator(Matrix::Identity(n, n));
  }

  const Matrix& matrix() const noexcept { return matrix_; }
  Index dim() const noexcept { return matrix_.rows(); }

 private:
  explicit UnitaryOperator(Matrix m) : matrix_(std::move(m)) {}
  Matrix matrix_;
};

struct SpectralDecomposition {
  std::vector<double> weights;  // descending, clamped to [0, 1]
  Matrix frame;                 // column k is |k>
  std::vector<std::vector<std::size_t>> degenerate_groups;

  Index dim() const noexcept { return frame.rows(); }
  Vector ket(std::size_t k) const { return frame.col(static_cast<Index>(k)); }
  bool degenerate() const noexcept { return !degenerate_groups.empty(); }
};

/// Groups of consecutive (descending) eigenvalues whose gaps fall below tol.
inline std::vector<std::vector<std::size_t>> degenerate_groups(
    std::span<const double> sorted_desc, double tol) {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> current{0};
  for (std::size_t i = 1; i < sorted_desc.size(); ++i) {
    if (sorted_desc[i - 1] - sorted_desc[i] < tol) {
      current.push_back(i);
    } else {
      if (current.size() > 1) groups.push_back(current);
      current = {i};
    }
  }
  if (current.size() > 1) groups.push_back(current);
  return groups;
}

/// Eigen-decomposition without the uniqueness requirement: degenerate groups
/// are recorded, not rejected.
inline SpectralDecomposition eigen_decompose(const DensityOperator& rho,
                                             double tol = tolerance::degeneracy) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  const Index n = rho.dim();
  SpectralDecomposition out;
  out.frame.resize(n, n);
  out.weights.resize(static_cast<std::size_t>(n));
  // the solver sorts ascending
  for (Index k = 0; k < n; ++k) {
    const Index src = n - 1 - k;
    out.weights[static_cast<std::size_t>(k)] = std::clamp(es.eigenvalues()(src), 0.0, 1.0);
    out.frame.col(k) = es.eigenvectors().col(src);
    apply_phase_convention(out.frame.col(k));
  }
  out.degenerate_groups = degenerate_groups(out.weights, tol);
  return out;
}

/// Spectral decomposition with a unique frame; throws DegenerateSpectrumError
/// when any eigenvalue gap is below tol.
inline SpectralDecomposition spectral(const DensityOperator& rho,
                                      double tol = tolerance::degeneracy) {
  SpectralDecomposition out = eigen_decompose(rho, tol);
  if (out.degenerate()) {
    std::string where;
    for (const auto& g : out.degenerate_groups) {
      where += "{";
      for (std::size_t i = 0; i < g.size(); ++i) {
        where += (i ? "," : "") + std::to_string(g[i]);
      }
      where += "}";
    }
    throw DegenerateSpectrumError(out.degenerate_groups,
                                  "eigenvalue groups " + where + " closer than " +
                                      num(tol));
  }
  return out;
}

/// Builds sum_k w_k |k><k| from a probability list and an orthonormal frame
/// (frame vectors as columns).
inline DensityOperator make_density(std::span<const double> weights, const Matrix& frame) {
  const auto n = static_cast<Index>(weights.size());
  if (n == 0 || frame.cols() != n || frame.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(weights.size()) + " weights for a " +
                    std::to_string(frame.rows()) + "x" + std::to_string(frame.cols()) +
                    " frame");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= -tolerance::weights)) {
      throw Error(ErrorCode::NonStochasticWeights,
                  "weight " + std::to_string(k) + " is " + std::to_string(weights[k]));
    }
    sum += weights[k];
  }
  if (std::abs(sum - 1.0) > tolerance::weights) {
    throw Error(ErrorCode::NonStochasticWeights,
                "weights sum to " + num(sum));
  }
  if (orthonormality_defect(frame) > tolerance::orthonormal) {
    throw Error(ErrorCode::NonOrthonormalFrame,
                "frame orthonormality defect " +
                    num(orthonormality_defect(frame)));
  }
  Matrix rho = Matrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    const double w = std::max(weights[static_cast<std::size_t>(k)], 0.0);
    rho.noalias() += w * frame.col(k) * frame.col(k).adjoint();
  }
  return DensityOperator::from_matrix(rho);
}

inline DensityOperator evolve(const DensityOperator& rho, const UnitaryOperator& u) {
  if (rho.dim() != u.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "state dimension " + std::to_string(rho.dim()) + " vs unitary dimension " +
                    std::to_string(u.dim()));
  }
  return DensityOperator::from_matrix(u.matrix() * rho.matrix() * u.matrix().adjoint());
}

/// Sorted (descending) eigenvalues of a Hermitian matrix.
inline std::vector<double> eigenvalues_desc(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian, Eigen::EigenvaluesOnly);
  std::vector<double> v(es.eigenvalues().data(),
                        es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

/// One Newton-Schulz step towards the nearest unitary, U (3 - U^dagger U) / 2.
/// Squares the unitarity defect; used to stop round-off drift in long
/// time-ordered products.
inline Matrix reunitarize(const Matrix& u) {
  const Index n = u.rows();
  return 0.5 * u * (3.0 * Matrix::Identity(n, n) - u.adjoint() * u);
}

/// exp(-i H dt) for Hermitian H, via its eigen-decomposition.
inline Matrix exp_minus_i(const Matrix& hermitian, double dt) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  Vector phases(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    phases(i) = std::polar(1.0, -lambda(i) * dt);
  }
  const Matrix& v = es.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

}  // namespace mixphase
