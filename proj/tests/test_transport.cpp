#include "mixphase/bloch.hpp"
#include "mixphase/random.hpp"
#include "mixphase/transport.hpp"
#include "test_paths.hpp"
#include "test_support.hpp"

namespace mixphase {
namespace {

using bloch::Vec3;
using testing::angle_gap;
using testing::mat2;
using namespace testing::paths;

TEST(ProjectGenerator, DiagonalGeneratorVanishes) {
  const Matrix h = mat2(0.3, 0, 0, -1.2);
  EXPECT_MATRIX_NEAR(project_generator(h, Matrix::Identity(2, 2)), Matrix::Zero(2, 2), 1e-16);
}

TEST(ProjectGenerator, OffDiagonalUntouched) {
  EXPECT_MATRIX_NEAR(project_generator(bloch::sigma_x(), Matrix::Identity(2, 2)),
                     bloch::sigma_x(), 0.0);
}

TEST(ProjectGenerator, RandomFrameDiagonalRemoved) {
  random::Engine rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix h = random::hermitian(3, rng, 2.0);
    const Matrix f = random::haar_unitary(3, rng).matrix();
    const Matrix p = project_generator(h, f);
    EXPECT_LE(hermiticity_defect(p), 1e-15);
    for (Index k = 0; k < 3; ++k) EXPECT_LT(std::abs(f.col(k).dot(p * f.col(k))), 1e-14);
  }
}

TEST(ProjectGenerator, RejectsBadInputs) {
  try {
    project_generator(mat2(0, 1, 0, 0), Matrix::Identity(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonHermitianInput);
  }
  EXPECT_THROW(project_generator(bloch::sigma_x(), mat2(1, 0.2, 0, 1)), Error);
}

TEST(Integrate, SpinorSignAfterFullTurn) {
  const double omega = 1.7;
  const UnitaryPath p = integrate(constant_path(0.5 * omega * bloch::sigma_z(), 2 * kPi / omega, 50));
  EXPECT_MATRIX_NEAR(p.final(), -Matrix::Identity(2, 2), 1e-12);
}

TEST(Integrate, ZeroGeneratorIsIdentity) {
  const UnitaryPath p = integrate(constant_path(Matrix::Zero(3, 3), 2.0, 10), 3);
  for (const Matrix& u : p.unitaries()) EXPECT_MATRIX_NEAR(u, Matrix::Identity(3, 3), 0.0);
}

TEST(Integrate, UnitaryAtEveryNode) {
  random::Engine rng(4);
  const UnitaryPath p = integrate(smooth_random_path(4, rng, 3000), 2);
  for (const Matrix& u : p.unitaries()) {
    EXPECT_MATRIX_NEAR(u.adjoint() * u, Matrix::Identity(4, 4), 1e-12);
  }
}

TEST(Integrate, SecondOrderInStepSize) {
  // H(t) = sigma_z + t sigma_x on [0, 1], linear between two samples, so the
  // only error is the midpoint exponential splitting. Reference: 2^14 substeps.
  const GeneratorPath gen = GeneratorPath::create(
      {0.0, 1.0}, {bloch::sigma_z(), Matrix(bloch::sigma_z() + bloch::sigma_x())});
  const Matrix ref = integrate(gen, 1 << 14).final();
  const double e1 = max_abs(integrate(gen, 32).final() - ref);
  const double e2 = max_abs(integrate(gen, 64).final() - ref);
  const double e3 = max_abs(integrate(gen, 128).final() - ref);
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.5);
  EXPECT_GT(e2 / e3, 3.5);
  EXPECT_LT(e2 / e3, 4.5);
}

TEST(Integrate, RejectsBadInputs) {
  EXPECT_THROW(integrate(constant_path(bloch::sigma_x(), 1.0, 4), 0), Error);
  try {
    GeneratorPath::create({}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyPath);
  }
  EXPECT_THROW(GeneratorPath::create({0.0, 1.0}, {bloch::sigma_x(), mat2(0, 1, 0, 0)}), Error);
  EXPECT_THROW(GeneratorPath::create({0.0, 1.0, 0.5}, std::vector<Matrix>(3, bloch::sigma_x())),
               Error);
}

TEST(TransportEvolution, PureStateIsParallelTransported) {
  random::Engine rng(12);
  const GeneratorPath gen = smooth_random_path(2, rng, 2000);
  const Vector psi0 = random::haar_unitary(2, rng).matrix().col(0);
  const DensityOperator rho = DensityOperator::from_matrix(psi0 * psi0.adjoint());
  const UnitaryPath p = transport_evolution(rho, gen);
  std::vector<Vector> psi;
  for (const Matrix& u : p.unitaries()) psi.push_back(u * psi0);
  const auto dpsi = detail::differentiate<Vector>(p.times(), psi);
  double worst = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) worst = std::max(worst, std::abs(psi[j].dot(dpsi[j])));
  EXPECT_LT(worst, 1e-6);
}

TEST(TransportEvolution, LatitudePrecessionMatchesClosedForm) {
  const double r = 0.5, theta = kPi / 4;
  const Precession pr = latitude_precession(r, theta, 2000);
  const UnitaryPath p = transport_evolution(pr.rho0, pr.gen);
  const double phi = std::arg((pr.rho0.matrix() * p.final()).trace());
  EXPECT_LT(angle_gap(phi, -std::atan(r * std::tan(pr.omega / 2))), 1e-5);
  EXPECT_LT(std::abs(dynamical_phase(pr.rho0, p)), 1e-6);
}

TEST(TransportEvolution, DynamicalPhaseVanishesOnRandomPaths) {
  random::Engine rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    const Index n = 2 + trial % 2;
    const DensityOperator rho = random::density(n, rng, 0.05);
    const UnitaryPath p = transport_evolution(rho, smooth_random_path(n, rng, 2000));
    EXPECT_LT(std::abs(dynamical_phase(rho, p)), 1e-6);
    const TransportDefect d = defect(rho, p);
    EXPECT_LT(d.global_defect, 1e-6);
    for (double e : d.eigen_defects) EXPECT_LT(e, 1e-6);
  }
}

TEST(TransportEvolution, RefusesDegenerateState) {
  const DensityOperator rho = DensityOperator::from_matrix(0.5 * Matrix::Identity(2, 2));
  EXPECT_THROW(transport_evolution(rho, constant_path(bloch::sigma_x(), 1.0, 10)),
               DegenerateSpectrumError);
}

TEST(TransportEvolution, ReparametrizationInvariant) {
  // s(t) = t + 0.3 sin(pi t) / pi is monotone on [0, 1]; H~(t) = s'(t) H(s(t)).
  random::Engine rng(8);
  const Matrix a = random::hermitian(2, rng, 1.0);
  const Matrix b = random::hermitian(2, rng, 1.0);
  const DensityOperator rho = random::density(2, rng, 0.1);
  const auto t = uniform_grid(1.0, 2000);
  std::vector<Matrix> h, hs;
  for (double x : t) {
    const double s = x + 0.3 * std::sin(kPi * x) / kPi;
    const double ds = 1 + 0.3 * std::cos(kPi * x);
    h.push_back(a + x * x * b);
    hs.push_back(ds * (a + s * s * b));
  }
  const UnitaryPath p1 = transport_evolution(rho, GeneratorPath::create(t, h));
  const UnitaryPath p2 = transport_evolution(rho, GeneratorPath::create(t, hs));
  const double g1 = std::arg((rho.matrix() * p1.final()).trace());
  const double g2 = std::arg((rho.matrix() * p2.final()).trace());
  EXPECT_LT(angle_gap(g1, g2), 1e-6);
}

TEST(FrameTransport, ConstantFrameIsIdentity) {
  random::Engine rng(1);
  const Matrix f = random::haar_unitary(3, rng).matrix();
  const auto t = uniform_grid(1.0, 5);
  const UnitaryPath p = frame_transport(std::vector<Matrix>(t.size(), f), t);
  for (const Matrix& u : p.unitaries()) EXPECT_MATRIX_NEAR(u, Matrix::Identity(3, 3), 1e-15);
}

TEST(FrameTransport, GreatCircleGivesMinusOne) {
  // sigma_z eigenframe dragged once around the x-z great circle
  const int steps = 400;
  const auto t = uniform_grid(1.0, steps);
  std::vector<Matrix> frames;
  for (double x : t) {
    const double a = 2 * kPi * x;
    frames.push_back(bloch::eigenframe(Vec3(std::sin(a), 0.0, std::cos(a))));
  }
  const UnitaryPath p = frame_transport(frames, t);
  const Matrix& f0 = frames.front();
  for (Index k = 0; k < 2; ++k) {
    const Complex factor = f0.col(k).dot(p.final() * f0.col(k));
    EXPECT_NEAR(std::abs(factor - Complex(-1.0, 0.0)), 0.0, 1e-12);
  }
}

TEST(FrameTransport, AgreesWithProjectedIntegration) {
  const double r = 0.6, theta = 1.1;
  const Precession pr = latitude_precession(r, theta, 4000);
  const UnitaryPath projected = transport_evolution(pr.rho0, pr.gen);
  const UnitaryPath raw = integrate(pr.gen);
  const SpectralDecomposition s0 = spectral(pr.rho0);
  std::vector<Matrix> frames;
  for (const Matrix& u : raw.unitaries()) frames.push_back(u * s0.frame);
  const UnitaryPath rephased = frame_transport(frames, pr.gen.times());
  EXPECT_MATRIX_NEAR(rephased.final(), projected.final(), 1e-6);
}

TEST(FrameTransport, DetectsDiscontinuityAndBadFrames) {
  const auto t = uniform_grid(1.0, 2);
  try {
    frame_transport({Matrix::Identity(2, 2), Matrix::Identity(2, 2), mat2(0, 1, 1, 0)}, t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FrameDiscontinuity);
  }
  try {
    frame_transport({Matrix::Identity(2, 2), mat2(1, 0.3, 0, 1), Matrix::Identity(2, 2)}, t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonOrthonormalFrame);
  }
}

TEST(Defect, IdentityPathIsClean) {
  const DensityOperator rho = DensityOperator::from_matrix(mat2(0.7, 0, 0, 0.3));
  const TransportDefect d = defect(rho, UnitaryPath::constant(uniform_grid(1.0, 10), 2));
  EXPECT_LT(d.global_defect, 1e-12);
  for (double e : d.eigen_defects) EXPECT_LT(e, 1e-12);
}

TEST(Defect, DetectsUnprojectedPrecession) {
  const Precession pr = latitude_precession(0.5, kPi / 3, 2000);
  const UnitaryPath raw = integrate(pr.gen);
  EXPECT_GT(defect(pr.rho0, raw).global_defect, 0.01);
  const UnitaryPath projected = transport_evolution(pr.rho0, pr.gen);
  EXPECT_LT(defect(pr.rho0, projected).global_defect, 1e-6);
}

TEST(Defect, GlobalBoundedByWeightedEigenDefects) {
  random::Engine rng(64);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 2 + trial % 3;
    const DensityOperator rho = random::density(n, rng, 1e-3);
    const UnitaryPath raw = integrate(smooth_random_path(n, rng, 200));
    const SpectralDecomposition s = spectral(rho);
    const TransportDefect d = defect(rho, raw);
    double bound = 0.0;
    for (std::size_t k = 0; k < s.weights.size(); ++k) bound += s.weights[k] * d.eigen_defects[k];
    EXPECT_LE(d.global_defect, bound + 1e-10);
  }
}

TEST(Defect, NeedsThreeSamples) {
  const DensityOperator rho = DensityOperator::from_matrix(mat2(0.7, 0, 0, 0.3));
  try {
    defect(rho, UnitaryPath::constant({0.0, 1.0}, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PathTooShort);
  }
}

TEST(DynamicalPhase, IdentityPathIsZero) {
  const DensityOperator rho = DensityOperator::from_matrix(mat2(0.7, 0, 0, 0.3));
  EXPECT_LT(std::abs(dynamical_phase(rho, UnitaryPath::constant(uniform_grid(1.0, 10), 2))), 1e-12);
}

TEST(DynamicalPhase, ConstantGeneratorAnalytic) {
  random::Engine rng(19);
  const DensityOperator rho = random::density(3, rng);
  const Matrix h = random::hermitian(3, rng, 1.5);
  const double tau = 2.3;
  const UnitaryPath p = integrate(constant_path(h, tau, 2000));
  const double expect = -tau * (rho.matrix() * h).trace().real();
  EXPECT_NEAR(dynamical_phase(rho, p), expect, 1e-6);
}

TEST(Corners, DerivativesStayOneSidedAcrossJunctions) {
  // Two constant-generator legs joined at t = 1 with a repeated node; the
  // derivative jumps there but each side is exact up to discretization.
  const int m = 1000;
  std::vector<double> t;
  std::vector<Matrix> h;
  for (int leg = 0; leg < 2; ++leg) {
    for (int s = 0; s <= m; ++s) {
      t.push_back(leg + static_cast<double>(s) / m);
      h.push_back(leg == 0 ? bloch::sigma_x() : bloch::sigma_y());
    }
  }
  const UnitaryPath p = integrate(GeneratorPath::create(t, h));
  EXPECT_EQ(p.size(), t.size());
  const DensityOperator rho = DensityOperator::from_matrix(mat2(0.8, 0, 0, 0.2));
  // Tr[rho(t) H] is constant on each leg: 0 on the sigma_x leg; on the
  // sigma_y leg the Bloch vector 0.6 z has been turned by 2 rad about x to
  // 0.6 (0, -sin 2, cos 2). gamma_d = -(0 + 0.6 * (-sin 2)).
  const double expect = 0.6 * std::sin(2.0);
  EXPECT_NEAR(dynamical_phase(rho, p), expect, 1e-6);
  EXPECT_LT(defect(rho, UnitaryPath::constant(t, 2)).global_defect, 1e-12);
}

}  // namespace
}  // namespace mixphase
