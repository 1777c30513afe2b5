#include <gtest/gtest.h>

#include <cmath>

#include "mzweak/errors.hpp"
#include "mzweak/jones.hpp"
#include "mzweak/weakmeas.hpp"
#include "oracles.hpp"

namespace {

using namespace mzweak;
using namespace mzweak::weakmeas;
using jones::hwp;
using oracle::kPi;

constexpr double kSigma = kDefaultBeamSigma;

JonesVector post_selection(double theta) { return hwp(theta).adjoint() * JonesVector::diagonal(); }

WeakMeasConfig config(double theta, double ratio, double sigma = kSigma) {
  return WeakMeasConfig::from_ratio(JonesVector::diagonal(), post_selection(theta), ratio, sigma);
}

oracle::Pointer oracle_pointer(const WeakMeasConfig& c) {
  // Displaced component V: the H part stays at 0, the V part moves to a.
  const Complex c_u = std::conj(c.phi.h) * c.psi.h;
  const Complex c_d = std::conj(c.phi.v) * c.psi.v;
  return {c_u, c_d, c.displacement_a, c.beam_sigma};
}

TEST(Pointer, Coefficients) {
  WeakMeasConfig c{JonesVector::horizontal(), JonesVector::horizontal(), 1e-4, kSigma};
  auto st = pointer_after_postselection(c);
  EXPECT_EQ(st.c_displaced, Complex(0.0));
  EXPECT_NEAR(std::abs(st.c_undisplaced - 1.0), 0.0, 1e-15);

  c.psi = c.phi = JonesVector::diagonal();
  st = pointer_after_postselection(c);
  EXPECT_NEAR(std::abs(st.c_undisplaced - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(st.c_displaced - 0.5), 0.0, 1e-15);

  c.phi = JonesVector::antidiagonal();
  st = pointer_after_postselection(c);
  EXPECT_NEAR(std::abs(st.c_undisplaced - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(st.c_displaced + 0.5), 0.0, 1e-15);
}

TEST(Pointer, HorizontalDisplacementSwapsRoles) {
  WeakMeasConfig c{JonesVector::diagonal(), JonesVector::horizontal(), 1e-4, kSigma, Component::H};
  const auto st = pointer_after_postselection(c);
  EXPECT_NEAR(std::abs(st.c_displaced - std::sqrt(0.5)), 0.0, 1e-15);
  EXPECT_EQ(st.c_undisplaced, Complex(0.0));
  EXPECT_NEAR(centroid_exact(c), 1e-4, 1e-18);
}

TEST(Pointer, ZeroPostSelectionThrows) {
  const WeakMeasConfig c{JonesVector::horizontal(), JonesVector::vertical(), 1e-4, kSigma};
  EXPECT_THROW(pointer_after_postselection(c), ZeroPostSelection);
  EXPECT_THROW(centroid_exact(c), ZeroPostSelection);
  EXPECT_THROW(momentum_centroid(c), ZeroPostSelection);
}

TEST(Pointer, DensityAndNormMatchQuadrature) {
  oracle::Random rng(41);
  for (int i = 0; i < 50; ++i) {
    const WeakMeasConfig c{rng.state(), rng.state(), rng.uniform(0, 3) * kSigma, kSigma};
    const auto st = pointer_after_postselection(c);
    const auto ref = oracle_pointer(c);
    EXPECT_NEAR(st.norm, ref.norm(), 1e-10 * std::max(ref.norm(), 1e-12));
    const Complex cu = ref.c_u, cd = ref.c_d;
    const double closed =
        std::norm(cu) + std::norm(cd) + 2 * (std::conj(cu) * cd).real() * pointer_overlap(c.displacement_a, kSigma);
    EXPECT_NEAR(st.norm, closed, 1e-14);
    for (const double x : {-kSigma, 0.3 * kSigma, 2 * kSigma}) {
      EXPECT_NEAR(st.density(x), ref.density(x), 1e-12 * ref.density(0.0) + 1e-300);
    }
  }
}

TEST(Centroid, ClosedFormAgreesWithQuadratureOnGrid) {
  for (int i = 0; i < 50; ++i) {
    const double theta = kPi * i / 50.0;
    for (int j = 0; j < 20; ++j) {
      const double ratio = 0.01 * std::pow(300.0, j / 19.0);  // 0.01 .. 3
      const auto c = config(theta, ratio);
      const auto ref = oracle_pointer(c);
      ASSERT_NEAR(centroid_exact(c) / c.displacement_a, ref.centroid() / c.displacement_a, 1e-9)
          << "theta=" << theta << " a/sigma=" << ratio;
    }
  }
}

TEST(Centroid, OrthogonalSelectionGivesExactlyHalf) {
  for (const double sigma : {1e-6, 5e-4, 1.0, 37.0}) {
    for (const double ratio : {1e-4, 0.01, 0.2, 1.0, 5.0}) {
      const WeakMeasConfig c{JonesVector::diagonal(), JonesVector::antidiagonal(), ratio * sigma, sigma};
      EXPECT_EQ(centroid_exact(c), c.displacement_a / 2);
    }
  }
  const auto c = config(0.0, 0.2);
  EXPECT_NEAR(oracle_pointer(c).centroid() / c.displacement_a, 0.5, 1e-10);
}

TEST(Centroid, WeakLimitAndTrivialCases) {
  WeakMeasConfig c = WeakMeasConfig::from_ratio(JonesVector::diagonal(), JonesVector::diagonal(), 0.01);
  EXPECT_NEAR(centroid_exact(c) / c.displacement_a, 0.5, 1e-4);
  c.psi = c.phi = JonesVector::horizontal();
  EXPECT_EQ(centroid_exact(c), 0.0);
}

TEST(Centroid, WeakLimitConvergenceIsQuadratic) {
  for (const double deg : {10.0, 30.0, 60.0, 80.0, 120.0}) {
    const double theta = deg * kPi / 180;
    const double exact = exact_weak_value(JonesVector::diagonal(), post_selection(theta), Component::V).real();
    double previous = 0;
    for (const double ratio : {0.2, 0.1, 0.05, 0.025}) {
      const auto c = config(theta, ratio);
      const double err = std::abs(centroid_exact(c) / c.displacement_a - exact);
      if (previous > 0) EXPECT_GE(previous / err, 3.5) << deg << ' ' << ratio;
      previous = err;
    }
  }
}

TEST(WeakValue, InferredValuesAndComplement) {
  oracle::Random rng(42);
  for (int i = 0; i < 200; ++i) {
    const auto c = config(rng.uniform(0, kPi), rng.uniform(0.001, 2));
    const auto est = inferred_weak_value(c);
    EXPECT_NEAR(est.inferred_weak_value_re, est.centroid / c.displacement_a, 1e-15);
    EXPECT_NEAR(est.inferred_weak_value_re + est.inferred_complement_re, 1.0, 1e-15);
  }
}

TEST(WeakValue, DiagonalPostSelectionGivesHalf) {
  const auto est = inferred_weak_value(config(kPi / 4, 1e-3));
  EXPECT_NEAR(est.inferred_complement_re, 0.5, 1e-6);
}

TEST(WeakValue, OrthogonalSelectionStaysFinite) {
  const auto est = inferred_weak_value(config(0.0, 0.2));
  EXPECT_DOUBLE_EQ(est.inferred_weak_value_re, 0.5);
  EXPECT_THROW(exact_weak_value(JonesVector::diagonal(), post_selection(0.0), Component::V), OrthogonalSelection);
}

TEST(WeakValue, EigenRangeMapIsApplied) {
  const auto c = config(0.5, 0.05);
  const auto plain = inferred_weak_value(c);
  const auto mapped = inferred_weak_value(c, {2.0, -0.5});
  EXPECT_NEAR(mapped.inferred_weak_value_re, 2 * plain.inferred_weak_value_re - 0.5, 1e-14);
  EXPECT_NEAR(mapped.inferred_complement_re, 1 - mapped.inferred_weak_value_re, 1e-15);
}

TEST(WeakValue, RequiresPositiveDisplacement) {
  WeakMeasConfig c = config(0.5, 0.05);
  c.displacement_a = 0.0;
  EXPECT_THROW(inferred_weak_value(c), InvalidArgument);
}

TEST(Momentum, RealAmplitudesGiveZero) {
  for (int deg = 5; deg < 180; deg += 10) EXPECT_NEAR(momentum_centroid(config(deg * kPi / 180, 0.3)), 0.0, 1e-9);
  WeakMeasConfig c = config(0.7, 0.3);
  c.displacement_a = 0.0;
  EXPECT_EQ(momentum_centroid(c), 0.0);
}

TEST(Momentum, MatchesPositionSpaceOracle) {
  oracle::Random rng(43);
  for (int i = 0; i < 30; ++i) {
    const WeakMeasConfig c{rng.state(), rng.state(), rng.uniform(0.01, 2) * kSigma, kSigma};
    const double ref = oracle_pointer(c).momentum();
    EXPECT_NEAR(momentum_centroid(c), ref, 1e-8 * std::abs(ref) + 1e-9 / kSigma);
  }
}

TEST(Momentum, WeakLimitTracksImaginaryWeakValue) {
  const auto psi = JonesVector::diagonal();
  const auto phi = JonesVector::right_circular();
  const auto c = WeakMeasConfig::from_ratio(psi, phi, 0.01);
  const double w_im = exact_weak_value(psi, phi, Component::V).imag();
  const double expected = c.displacement_a * w_im / (2 * kSigma * kSigma);
  ASSERT_GT(std::abs(expected), 0.0);
  EXPECT_NEAR(momentum_centroid(c), expected, 0.01 * std::abs(expected));
}

TEST(Sweep, ExpectationThroughWeakMeasurement) {
  const double thetas[] = {kPi / 4, 0.0, kPi / 6};
  const auto rows = expectation_of_A_via_weakmeas(thetas, {});
  EXPECT_NEAR(rows[0].expectation_inferred, 0.5, 1e-4);
  EXPECT_NEAR(rows[1].expectation_inferred, 0.0, 1e-12);
  EXPECT_NEAR(rows[1].expectation_exact, 0.5, 1e-15);
  EXPECT_TRUE(rows[1].amplification_region);
  EXPECT_FALSE(rows[1].weak_value_h_exact);
  const double z30 = (std::cos(kPi / 3) + std::sin(kPi / 3)) / 2;
  EXPECT_NEAR(rows[2].expectation_inferred, z30, 0.02 * z30);
  EXPECT_NEAR(rows[2].overlap, std::sin(kPi / 3), 1e-15);
}

TEST(Sweep, MatchesExactWeakValueAwayFromOrthogonality) {
  std::vector<double> thetas;
  for (int deg = 0; deg <= 360; deg += 2) thetas.push_back(deg * kPi / 180);
  const auto rows = expectation_of_A_via_weakmeas(thetas, {});
  int checked = 0;
  for (const auto& r : rows) {
    if (std::abs(std::sin(2 * r.theta)) <= 0.1) continue;
    const double truth = oracle::weak_value_h(r.theta);
    EXPECT_NEAR(r.weak_value_h_inferred, truth, 0.01 * std::abs(truth)) << r.theta * 180 / kPi;
    ++checked;
  }
  EXPECT_GT(checked, 150);
}

TEST(Sweep, CentroidNoiseIsSeededPerRow) {
  std::vector<double> thetas;
  for (int deg = 10; deg < 80; deg += 10) thetas.push_back(deg * kPi / 180);
  WeakSweepOptions o;
  o.centroid_noise_std = 1e-7;
  o.seed = 17;
  const auto a = expectation_of_A_via_weakmeas(thetas, o);
  const auto b = expectation_of_A_via_weakmeas(thetas, o);
  const auto clean = expectation_of_A_via_weakmeas(thetas, {});
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].centroid_over_a, b[i].centroid_over_a);
    differs |= a[i].centroid_over_a != clean[i].centroid_over_a;
  }
  EXPECT_TRUE(differs);
  // Row i's noise does not depend on how many rows precede it.
  const auto tail = expectation_of_A_via_weakmeas(std::span(thetas).first(3), o);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(tail[i].centroid_over_a, a[i].centroid_over_a);
}

TEST(Config, Validation) {
  WeakMeasConfig c = config(0.3, 0.1);
  c.beam_sigma = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = config(0.3, 0.1);
  c.displacement_a = -1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = config(0.3, 0.1);
  c.psi = JonesVector{1.0, 1.0};
  EXPECT_THROW(c.validate(), NotNormalized);
}

}  // namespace
