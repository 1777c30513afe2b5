#include <gtest/gtest.h>

#include <cmath>

#include "mzweak/errors.hpp"
#include "mzweak/jones.hpp"
#include "oracles.hpp"

namespace {

using namespace mzweak::jones;
using oracle::kPi;

TEST(Matmul, PauliXTimesProjectorIsLowering) {
  EXPECT_EQ(max_abs_diff(pauli_x() * projector_h(), lowering()), 0.0);
}

TEST(Matmul, IdentityIsNeutral) {
  oracle::Random rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto m = rng.matrix();
    EXPECT_EQ(max_abs_diff(JonesMatrix::identity() * m, m), 0.0);
    EXPECT_EQ(max_abs_diff(m * JonesMatrix::identity(), m), 0.0);
  }
}

TEST(Matmul, MatchesExplicitSummation) {
  oracle::Random rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto a = rng.matrix();
    const auto b = rng.matrix();
    EXPECT_LT(max_abs_diff(matmul(a, b), oracle::product(a, b)), 1e-15);
  }
}

TEST(Expectation, ProjectorOnDiagonalIsHalf) {
  EXPECT_NEAR(std::abs(expectation(projector_h(), JonesVector::diagonal()) - 0.5), 0.0, 1e-15);
}

TEST(Expectation, IdentityIsOne) {
  oracle::Random rng(3);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(std::abs(expectation(JonesMatrix::identity(), rng.state()) - 1.0), 0.0, 1e-14);
}

TEST(Expectation, ClassOperatorOnDegreeGrid) {
  const auto plus = JonesVector::diagonal();
  for (int deg = 0; deg <= 360; ++deg) {
    const double t = deg * kPi / 180.0;
    const Complex z = expectation(class_operator(t), plus);
    const double closed = (std::cos(2 * t) + std::sin(2 * t)) / 2.0;
    EXPECT_NEAR(z.real(), closed, 1e-14) << deg;
    EXPECT_NEAR(z.imag(), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(z - oracle::sandwich(plus, oracle::product(oracle::half_wave(t), projector_h()), plus)), 0.0,
                1e-14);
  }
}

TEST(Expectation, RejectsUnnormalizedState) {
  EXPECT_THROW(expectation(pauli_z(), JonesVector{1.0, 1.0}), mzweak::NotNormalized);
}

TEST(MatrixSqrt, ProjectorAndDiagonal) {
  EXPECT_LT(max_abs_diff(matrix_sqrt_psd(projector_h()), projector_h()), 1e-15);
  EXPECT_LT(max_abs_diff(matrix_sqrt_psd(JonesMatrix::diag(4.0, 1.0)), JonesMatrix::diag(2.0, 1.0)), 1e-15);
}

TEST(MatrixSqrt, SquaresBackOnRandomPsd) {
  oracle::Random rng(4);
  for (int i = 0; i < 2000; ++i) {
    const auto b = rng.matrix();
    const auto m = oracle::product(oracle::dagger(b), b);
    const auto s = matrix_sqrt_psd(m);
    EXPECT_TRUE(s.is_psd());
    EXPECT_LT(oracle::max_diff(oracle::product(s, s), m), 1e-10);
  }
}

TEST(MatrixSqrt, RejectsIndefinite) { EXPECT_THROW(matrix_sqrt_psd(pauli_z()), mzweak::NotPsd); }

TEST(Polar, LoweringGivesPauliXAndProjector) {
  const auto p = polar_decompose(lowering());
  EXPECT_LT(max_abs_diff(p.u, pauli_x()), 1e-12);
  EXPECT_LT(max_abs_diff(p.r, projector_h()), 1e-12);
  EXPECT_LT(p.residual, 1e-12);
}

TEST(Polar, UnitaryGivesIdentityFactor) {
  oracle::Random rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto w = polar_decompose(rng.matrix()).u;  // a random unitary
    const auto p = polar_decompose(w);
    EXPECT_LT(max_abs_diff(p.u, w), 1e-10);
    EXPECT_LT(max_abs_diff(p.r, JonesMatrix::identity()), 1e-10);
  }
}

TEST(Polar, ZeroMatrixGivesIdentityUnitary) {
  const auto p = polar_decompose(JonesMatrix::zero());
  EXPECT_EQ(max_abs_diff(p.u, JonesMatrix::identity()), 0.0);
  EXPECT_EQ(max_abs_diff(p.r, JonesMatrix::zero()), 0.0);
}

TEST(Polar, ReconstructionOnTenThousandRandomMatrices) {
  oracle::Random rng(6);
  for (int i = 0; i < 10000; ++i) {
    const auto a = rng.matrix();
    const auto p = polar_decompose(a);
    const double scale = std::max(1.0, oracle::frobenius(a));
    ASSERT_LE(oracle::frobenius(oracle::product(p.u, p.r) - a), 1e-10 * scale) << i;
    ASSERT_LE(p.residual, 1e-10 * scale);
    ASSERT_TRUE(p.u.is_unitary(1e-10));
    ASSERT_TRUE(p.r.is_psd(1e-10));
    // R is unique; U is unique for invertible A. Compare with an SVD built by Eigen.
    const auto ref = oracle::polar_via_eigen(a);
    ASSERT_LT(oracle::max_diff(p.r, ref.r), 1e-10);
    ASSERT_LT(oracle::max_diff(p.u, ref.u), 1e-8);
  }
}

TEST(Polar, SingularCompletionIsDeterministic) {
  // Rank one: the completed column of U follows the phase convention, so the
  // same input always yields bit-identical factors and U stays unitary.
  oracle::Random rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto x = rng.state();
    const auto y = rng.state();
    JonesMatrix a;
    a(0, 0) = x.h * std::conj(y.h);
    a(0, 1) = x.h * std::conj(y.v);
    a(1, 0) = x.v * std::conj(y.h);
    a(1, 1) = x.v * std::conj(y.v);
    const auto p1 = polar_decompose(a);
    const auto p2 = polar_decompose(a);
    EXPECT_EQ(max_abs_diff(p1.u, p2.u), 0.0);
    EXPECT_TRUE(p1.u.is_unitary(1e-10));
    EXPECT_LT(oracle::frobenius(oracle::product(p1.u, p1.r) - a), 1e-10);
  }
}

TEST(WeakValue, ProjectorWithParallelSelection) {
  const auto plus = JonesVector::diagonal();
  EXPECT_NEAR(std::abs(weak_value(projector_h(), plus, pauli_x() * plus) - 0.5), 0.0, 1e-15);
}

TEST(WeakValue, IdentityIsOneForNonOrthogonalPairs) {
  oracle::Random rng(8);
  for (int i = 0; i < 1000; ++i) {
    const auto psi = rng.state();
    const auto phi = rng.state();
    if (std::abs(inner(phi, psi)) < 1e-6) continue;
    EXPECT_NEAR(std::abs(weak_value(JonesMatrix::identity(), psi, phi) - 1.0), 0.0, 1e-9);
  }
}

TEST(WeakValue, HalfWavePlateSweep) {
  const auto plus = JonesVector::diagonal();
  for (int deg = 1; deg < 90; ++deg) {
    const double t = deg * kPi / 180.0;
    const auto phi = hwp(t) * plus;
    EXPECT_NEAR(weak_value(projector_h(), plus, phi).real(), oracle::weak_value_h(t), 1e-12) << deg;
  }
}

TEST(WeakValue, OrthogonalSelectionThrows) {
  EXPECT_THROW(weak_value(projector_h(), JonesVector::diagonal(), JonesVector::antidiagonal()),
               mzweak::OrthogonalSelection);
}

TEST(IdentityChain, LoweringOnDiagonal) {
  EXPECT_NEAR(std::abs(nonhermitian_expectation_via_weak(lowering(), JonesVector::diagonal()) - 0.5), 0.0, 1e-15);
  const auto chain = weak_value_chain(lowering(), JonesVector::diagonal());
  EXPECT_NEAR(std::abs(chain.overlap - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(chain.weak_value - 0.5), 0.0, 1e-15);
}

TEST(IdentityChain, HermitianPsdMatchesDirect) {
  oracle::Random rng(9);
  for (int i = 0; i < 500; ++i) {
    const auto b = rng.matrix();
    const auto a = oracle::product(oracle::dagger(b), b);
    const auto psi = rng.state();
    const Complex z = nonhermitian_expectation_via_weak(a, psi);
    EXPECT_NEAR(z.imag(), 0.0, 1e-12);
    EXPECT_NEAR(z.real(), oracle::sandwich(psi, a, psi).real(), 1e-12);
  }
}

TEST(IdentityChain, RandomOperatorsAndStates) {
  oracle::Random rng(10);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto a = rng.matrix();
    const auto psi = rng.state();
    if (std::abs(oracle::sandwich(psi, polar_decompose(a).u, psi)) <= 1e-6) continue;
    const Complex z = nonhermitian_expectation_via_weak(a, psi);
    ASSERT_LT(std::abs(z - oracle::sandwich(psi, a, psi)), 1e-10) << i;
    ++checked;
  }
  EXPECT_GT(checked, 9900);
}

TEST(Elements, HalfWavePlateAngles) {
  const auto out = hwp(kPi / 8) * JonesVector::horizontal();
  EXPECT_NEAR(std::abs(out.h - JonesVector::diagonal().h), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(out.v - JonesVector::diagonal().v), 0.0, 1e-15);
  EXPECT_LT(max_abs_diff(hwp(kPi / 4), pauli_x()), 1e-15);
  EXPECT_LT(max_abs_diff(polarizer(0.0), projector_h()), 1e-15);
}

TEST(Elements, HalfWavePlateHermitianUnitaryPeriodic) {
  for (int deg = 0; deg <= 360; ++deg) {
    const double t = deg * kPi / 180.0;
    const auto h = hwp(t);
    EXPECT_TRUE(h.is_hermitian());
    EXPECT_TRUE(h.is_unitary());
    EXPECT_LT(max_abs_diff(hwp(t + kPi), h), 1e-14);
    EXPECT_LT(max_abs_diff(h, oracle::half_wave(t)), 1e-15);
  }
}

TEST(Elements, QuarterWavePlateUnitaryPolarizerProjector) {
  for (int deg = 0; deg < 180; deg += 7) {
    const double t = deg * kPi / 180.0;
    EXPECT_TRUE(qwp(t).is_unitary());
    const auto p = polarizer(t);
    EXPECT_LT(max_abs_diff(p * p, p), 1e-15);
    EXPECT_TRUE(p.is_hermitian());
    EXPECT_NEAR((p(0, 0) + p(1, 1)).real(), 1.0, 1e-15);  // rank one
  }
}

TEST(Elements, ProjectorsSumToIdentity) {
  EXPECT_EQ(max_abs_diff(projector_h() + projector_v(), JonesMatrix::identity()), 0.0);
}

TEST(Elements, ClassOperatorIsHalfWaveTimesProjector) {
  for (int deg = 0; deg < 360; deg += 5) {
    const double t = deg * kPi / 180.0;
    EXPECT_LT(max_abs_diff(class_operator(t), oracle::product(oracle::half_wave(t), projector_h())), 1e-15);
  }
}

}  // namespace
