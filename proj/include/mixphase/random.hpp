#pragma once

// Seeded generators for the randomized validation batches. The same seed
// always produces the same sequence with a given standard library.

#include <cstdint>
#include <random>
#include <vector>

#include "mixphase/core.hpp"

namespace mixphase::random {

using Engine = std::mt19937_64;

inline Matrix gaussian_matrix(Index n, Engine& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of R's diagonal absorbed into Q.
inline UnitaryOperator haar_unitary(Index n, Engine& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(n, rng));
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < n; ++k) {
    const Complex d = r(k, k);
    if (std::abs(d) > 0.0) q.col(k) *= d / std::abs(d);
  }
  return UnitaryOperator::from_matrix(q);
}

/// Hermitian matrix with spectral norm `scale`.
inline Matrix hermitian(Index n, Engine& rng, double scale = 1.0) {
  const Matrix g = gaussian_matrix(n, rng);
  Matrix h = 0.5 * (g + g.adjoint());
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues();
  const double norm = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
  return h * (scale / norm);
}

/// Probability vector whose sorted entries are separated by at least min_gap
/// (min_gap = 0 gives a plain flat-Dirichlet draw).
inline std::vector<double> weights(Index n, Engine& rng, double min_gap = 0.0) {
  std::exponential_distribution<double> expo(1.0);
  for (;;) {
    std::vector<double> w(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (auto& x : w) {
      x = expo(rng);
      sum += x;
    }
    for (auto& x : w) x /= sum;
    std::vector<double> s = w;
    std::sort(s.begin(), s.end());
    bool ok = true;
    for (std::size_t i = 1; i < s.size(); ++i) ok = ok && (s[i] - s[i - 1] >= min_gap);
    if (ok) return w;
  }
}

inline DensityOperator density(Index n, Engine& rng, double min_gap = 0.0) {
  const std::vector<double> w = weights(n, rng, min_gap);
  return make_density(w, haar_unitary(n, rng).matrix());
}

}  // namespace mixphase::random
