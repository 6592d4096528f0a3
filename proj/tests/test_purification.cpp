#include "mixphase/bloch.hpp"
#include "mixphase/interferometry.hpp"
#include "mixphase/purification.hpp"
#include "mixphase/random.hpp"
#include "test_paths.hpp"
#include "test_support.hpp"

namespace mixphase {
namespace {

using testing::mat2;
using namespace testing::paths;

// partial trace over the ancilla of the full |Psi><Psi| built from the
// amplitude vector, index s * N + a
Matrix oracle_partial_trace(const Matrix& amp) {
  const Index n = amp.rows();
  Vector psi(n * n);
  for (Index s = 0; s < n; ++s) {
    for (Index a = 0; a < n; ++a) psi(s * n + a) = amp(s, a);
  }
  const Matrix full = psi * psi.adjoint();
  Matrix red = Matrix::Zero(n, n);
  for (Index s = 0; s < n; ++s) {
    for (Index t = 0; t < n; ++t) {
      for (Index a = 0; a < n; ++a) red(s, t) += full(s * n + a, t * n + a);
    }
  }
  return red;
}

TEST(Purify, PureStateIsProduct) {
  const PurifiedState p = purify(DensityOperator::from_matrix(mat2(1, 0, 0, 0)));
  EXPECT_MATRIX_NEAR(p.amplitudes(), mat2(1, 0, 0, 0), 1e-15);
  EXPECT_EQ(p.system_dim(), 2);
  EXPECT_EQ(p.ancilla_dim(), 2);
}

TEST(Purify, DiagonalWeights) {
  const PurifiedState p = purify(DensityOperator::from_matrix(mat2(0.75, 0, 0, 0.25)));
  EXPECT_MATRIX_NEAR(p.amplitudes(), mat2(std::sqrt(0.75), 0, 0, std::sqrt(0.25)), 1e-15);
}

TEST(Purify, PartialTraceRecoversState) {
  random::Engine rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityOperator rho = random::density(3, rng);
    const PurifiedState p = purify(rho);
    EXPECT_NEAR(p.norm(), 1.0, 1e-12);
    EXPECT_MATRIX_NEAR(oracle_partial_trace(p.amplitudes()), rho.matrix(), 1e-10);
    EXPECT_MATRIX_NEAR(p.reduced_system(), rho.matrix(), 1e-10);
    // U x 1 keeps the norm and moves the reduced state to U rho U^dagger
    const UnitaryOperator u = random::haar_unitary(3, rng);
    const PurifiedState q = p.evolve_local(u);
    EXPECT_NEAR(q.norm(), 1.0, 1e-12);
    EXPECT_MATRIX_NEAR(oracle_partial_trace(q.amplitudes()), evolve(rho, u).matrix(), 1e-10);
  }
}

TEST(PurifiedOverlap, IdentityIsOne) {
  random::Engine rng(2);
  const DensityOperator rho = random::density(4, rng);
  EXPECT_LT(std::abs(purified_overlap(rho, UnitaryOperator::identity(4)) - Complex(1, 0)), 1e-14);
}

TEST(PurifiedOverlap, FullTurnOfUnpolarizedQubit) {
  const DensityOperator rho = DensityOperator::from_matrix(0.5 * Matrix::Identity(2, 2));
  const UnitaryOperator u = UnitaryOperator::from_matrix(exp_minus_i(bloch::sigma_z(), kPi));
  EXPECT_LT(std::abs(purified_overlap(rho, u) - Complex(-1, 0)), 1e-14);
}

TEST(PurifiedOverlap, EqualsTraceOverlap) {
  random::Engine rng(50);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 2 + trial % 3;
    const DensityOperator rho = random::density(n, rng);
    const UnitaryOperator u = random::haar_unitary(n, rng);
    const Complex ov = purified_overlap(rho, u);
    EXPECT_LT(std::abs(ov - (u.matrix() * rho.matrix()).trace()), 1e-12);
    const PhaseVisibility pv = phase_visibility(rho, u);
    EXPECT_NEAR(std::abs(ov), pv.visibility, 1e-12);
    EXPECT_LT(testing::angle_gap(std::arg(ov), pv.phase), 1e-12);
  }
}

TEST(PurifiedOverlap, DimensionMismatch) {
  const DensityOperator rho = DensityOperator::from_matrix(mat2(0.5, 0, 0, 0.5));
  try {
    purified_overlap(rho, UnitaryOperator::identity(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(PurifiedTransportCheck, IdentityPathIsZero) {
  const DensityOperator rho = DensityOperator::from_matrix(mat2(0.6, 0, 0, 0.4));
  EXPECT_LT(purified_transport_check(rho, UnitaryPath::constant(uniform_grid(1.0, 8), 2)), 1e-12);
}

TEST(PurifiedTransportCheck, TransportedPathIsParallel) {
  const Precession pr = latitude_precession(0.5, 1.0, 2000);
  EXPECT_LT(purified_transport_check(pr.rho0, transport_evolution(pr.rho0, pr.gen)), 1e-6);
}

TEST(PurifiedTransportCheck, MatchesDensityDefect) {
  const Precession pr = latitude_precession(0.5, 1.0, 2000);
  const UnitaryPath raw = integrate(pr.gen);
  const double check = purified_transport_check(pr.rho0, raw);
  EXPECT_GT(check, 0.01);
  EXPECT_NEAR(check, defect(pr.rho0, raw).global_defect, 1e-9);
  random::Engine rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 2 + trial % 3;
    const DensityOperator rho = random::density(n, rng);
    const UnitaryPath p = integrate(smooth_random_path(n, rng, 300));
    EXPECT_NEAR(purified_transport_check(rho, p), defect(rho, p).global_defect, 1e-9);
  }
}

TEST(PurifiedTransportCheck, NeedsThreeSamples) {
  const DensityOperator rho = DensityOperator::from_matrix(mat2(0.6, 0, 0, 0.4));
  try {
    purified_transport_check(rho, UnitaryPath::constant({0.0, 1.0}, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PathTooShort);
  }
}

}  // namespace
}  // namespace mixphase
