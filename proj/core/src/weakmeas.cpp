#include "mzweak/weakmeas.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mzweak/errors.hpp"
#include "mzweak/fringe_synth.hpp"
#include "mzweak/mzi.hpp"
#include "mzweak/parallel.hpp"
#include "quadrature.hpp"

namespace mzweak::weakmeas {

namespace {

constexpr double kZeroAmplitude = 1e-15;

/// 1 - exp(-a^2 / (8 sigma^2)) without cancellation for small a.
double one_minus_overlap(double a, double sigma) {
  const double r = a / sigma;
  return -std::expm1(-r * r / 8.0);
}

}  // namespace

void WeakMeasConfig::validate() const {
  if (!(beam_sigma > 0.0)) throw InvalidArgument("weak measurement: beam_sigma must be positive");
  if (!(displacement_a >= 0.0) || !std::isfinite(displacement_a)) {
    throw InvalidArgument("weak measurement: displacement must be finite and >= 0");
  }
  if (!psi.is_normalized()) throw NotNormalized("weak measurement: psi is not normalized");
  if (!phi.is_normalized()) throw NotNormalized("weak measurement: phi is not normalized");
}

WeakMeasConfig WeakMeasConfig::from_ratio(const JonesVector& psi, const JonesVector& phi, double a_over_sigma,
                                          double beam_sigma, Component displaced) {
  WeakMeasConfig cfg;
  cfg.psi = psi;
  cfg.phi = phi;
  cfg.beam_sigma = beam_sigma;
  cfg.displacement_a = a_over_sigma * beam_sigma;
  cfg.displaced = displaced;
  return cfg;
}

double PointerState::density(double x) const {
  const double amp_norm = 1.0 / std::sqrt(std::sqrt(2.0 * std::numbers::pi) * sigma);
  const double u0 = x / sigma;
  const double u1 = (x - displacement) / sigma;
  const Complex amp = c_undisplaced * (amp_norm * std::exp(-0.25 * u0 * u0)) +
                      c_displaced * (amp_norm * std::exp(-0.25 * u1 * u1));
  return std::norm(amp);
}

double pointer_overlap(double a, double sigma) {
  const double r = a / sigma;
  return std::exp(-r * r / 8.0);
}

PointerState pointer_after_postselection(const WeakMeasConfig& cfg) {
  cfg.validate();
  const Complex c_h = std::conj(cfg.phi.h) * cfg.psi.h;
  const Complex c_v = std::conj(cfg.phi.v) * cfg.psi.v;
  PointerState st;
  st.c_undisplaced = cfg.displaced == Component::V ? c_h : c_v;
  st.c_displaced = cfg.displaced == Component::V ? c_v : c_h;
  if (std::abs(st.c_undisplaced) < kZeroAmplitude && std::abs(st.c_displaced) < kZeroAmplitude) {
    throw ZeroPostSelection("pointer_after_postselection: post-selection probability is zero");
  }
  st.displacement = cfg.displacement_a;
  st.sigma = cfg.beam_sigma;
  const double cross = (std::conj(st.c_undisplaced) * st.c_displaced).real();
  st.norm = std::norm(st.c_undisplaced) + std::norm(st.c_displaced) +
            2.0 * cross * pointer_overlap(cfg.displacement_a, cfg.beam_sigma);
  return st;
}

double centroid_exact(const WeakMeasConfig& cfg) {
  const PointerState st = pointer_after_postselection(cfg);
  const double a = cfg.displacement_a;
  // Written around s = c_u + c_d so the orthogonal case (s = 0) stays exact.
  const Complex s = st.c_undisplaced + st.c_displaced;
  const double p = (std::conj(st.c_undisplaced) * st.c_displaced).real();
  const double q = one_minus_overlap(a, cfg.beam_sigma);
  const double num = (std::conj(st.c_displaced) * s).real() - p * q;
  const double den = std::norm(s) - 2.0 * p * q;
  if (!(den > 0.0)) throw ZeroPostSelection("centroid_exact: post-selection probability is zero");
  return a * (num / den);
}

double momentum_centroid(const WeakMeasConfig& cfg) {
  const PointerState st = pointer_after_postselection(cfg);
  const double a = cfg.displacement_a;
  const double sigma_p = 0.5 / cfg.beam_sigma;
  const Complex cu = st.c_undisplaced;
  const Complex cd = st.c_displaced;
  auto weight = [&](double p) {
    const double u = p / sigma_p;
    return std::exp(-0.5 * u * u) / (std::sqrt(2.0 * std::numbers::pi) * sigma_p);
  };
  auto g = [&](double p) { return std::norm(cu + cd * std::polar(1.0, -p * a)); };
  // Fold p -> -p: the first moment only sees the odd part of g.
  const double upper = 40.0 * sigma_p;
  const double num = detail::integrate([&](double p) { return p * weight(p) * (g(p) - g(-p)); }, 0.0, upper);
  const double den = detail::integrate([&](double p) { return weight(p) * (g(p) + g(-p)); }, 0.0, upper);
  if (!(den > 0.0)) throw ZeroPostSelection("momentum_centroid: post-selection probability is zero");
  return num / den;
}

WeakValueEstimate inferred_weak_value(const WeakMeasConfig& cfg, const EigenRangeMap& map) {
  if (!(cfg.displacement_a > 0.0)) throw InvalidArgument("inferred_weak_value: displacement must be positive");
  WeakValueEstimate est;
  est.centroid = centroid_exact(cfg);
  est.inferred_weak_value_re = map.apply(est.centroid / cfg.displacement_a);
  est.inferred_complement_re = 1.0 - est.inferred_weak_value_re;
  est.exact = true;
  return est;
}

Complex exact_weak_value(const JonesVector& psi, const JonesVector& phi, Component component) {
  const JonesMatrix projector = component == Component::H ? jones::projector_h() : jones::projector_v();
  return jones::weak_value(projector, psi, phi);
}

std::vector<WeakSweepRow> expectation_of_A_via_weakmeas(std::span<const double> thetas,
                                                        const WeakSweepOptions& options) {
  if (!(options.a_over_sigma > 0.0)) throw InvalidArgument("weak sweep: a_over_sigma must be positive");
  if (!(options.centroid_noise_std >= 0.0)) throw InvalidArgument("weak sweep: centroid noise must be >= 0");
  const JonesVector psi = JonesVector::diagonal();
  std::vector<WeakSweepRow> rows(thetas.size());
  parallel_for(thetas.size(), [&](std::size_t i) {
    const double theta = thetas[i];
    const JonesMatrix u = jones::hwp(theta);
    const JonesVector phi = u.adjoint() * psi;
    const auto cfg = WeakMeasConfig::from_ratio(psi, phi, options.a_over_sigma, options.beam_sigma,
                                                options.displaced);

    WeakSweepRow row;
    row.theta = theta;
    double centroid = centroid_exact(cfg);
    if (options.centroid_noise_std > 0.0) {
      std::mt19937_64 rng(fringe::derive_seed(options.seed, i));
      centroid += std::normal_distribution<double>(0.0, options.centroid_noise_std)(rng);
    }
    const double displaced_wv = options.map.apply(centroid / cfg.displacement_a);
    const double wv_v = options.displaced == Component::V ? displaced_wv : 1.0 - displaced_wv;
    row.centroid_over_a = centroid / cfg.displacement_a;
    row.weak_value_h_inferred = 1.0 - wv_v;
    const Complex overlap = jones::inner(phi, psi);
    row.overlap = overlap.real();
    if (std::abs(overlap) >= jones::kOrthogonalityTol) {
      row.weak_value_h_exact = exact_weak_value(psi, phi, Component::H).real();
    }
    row.expectation_inferred = row.weak_value_h_inferred * row.overlap;
    row.expectation_exact = jones::expectation(u * jones::projector_h(), psi).real();
    row.amplification_region = std::abs(overlap) < mzi::kAmplificationThreshold;
    rows[i] = row;
  });
  return rows;
}

}  // namespace mzweak::weakmeas
