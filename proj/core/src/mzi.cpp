#include "mzweak/mzi.hpp"

#include <cmath>
#include <string>

#include "mzweak/errors.hpp"

namespace mzweak::mzi {

namespace {

double wrap_phase(double x) {
  double w = std::remainder(x, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

}  // namespace

void ImperfectionModel::validate() const {
  if (!(retardance >= 0.0 && retardance <= std::numbers::pi)) {
    throw InvalidArgument("imperfection retardance must lie in [0, pi]");
  }
  if (!std::isfinite(axis) || (compensation_axis && !std::isfinite(*compensation_axis))) {
    throw InvalidArgument("imperfection axes must be finite");
  }
}

void MziConfig::validate() const {
  if (!psi.is_normalized()) throw NotNormalized("MziConfig: input state is not normalized");
  if (!std::isfinite(epsilon)) throw InvalidArgument("MziConfig: epsilon must be finite");
  if (imperfection) imperfection->validate();
}

MziConfig MziConfig::for_operator(const JonesMatrix& a, const JonesVector& psi, double epsilon) {
  const auto polar = jones::polar_decompose(a);
  MziConfig cfg;
  cfg.psi = psi;
  cfg.arm_a = polar.r;
  cfg.arm_b = polar.u.adjoint();
  cfg.epsilon = epsilon;
  return cfg;
}

MziConfig MziConfig::polarizer_hwp_setup(double theta, bool with_r, double epsilon) {
  MziConfig cfg;
  cfg.psi = JonesVector::diagonal();
  cfg.arm_a = with_r ? jones::projector_h() : JonesMatrix::identity();
  cfg.arm_b = jones::hwp(theta).adjoint();
  cfg.epsilon = epsilon;
  return cfg;
}

ArmFields arm_fields(const MziConfig& cfg) {
  JonesMatrix a_path = cfg.arm_a;
  JonesMatrix b_path = cfg.arm_b;
  if (cfg.imperfection && cfg.imperfection->retardance != 0.0) {
    const auto& imp = *cfg.imperfection;
    const JonesMatrix reflection = jones::retarder(imp.axis, imp.retardance);
    JonesMatrix b_errors = reflection * reflection;
    a_path = reflection * a_path;
    if (imp.compensation_axis) {
      a_path = jones::retarder(*imp.compensation_axis, -imp.retardance) * a_path;
      b_errors = jones::retarder(*imp.compensation_axis, -2.0 * imp.retardance) * b_errors;
    }
    b_path = b_path * b_errors;
  }
  return {a_path * cfg.psi, b_path * cfg.psi};
}

PortState propagate(const MziConfig& cfg) {
  cfg.validate();
  const auto [a, b] = arm_fields(cfg);
  const Complex phase = std::polar(1.0, cfg.epsilon);
  return {Complex(0.5) * (a - phase * b), Complex(0.5) * (a + phase * b)};
}

double intensity_c(const MziConfig& cfg) { return propagate(cfg).c.norm_squared(); }

double intensity_d(const MziConfig& cfg) { return propagate(cfg).d.norm_squared(); }

Complex arm_overlap(const MziConfig& cfg) {
  const auto [a, b] = arm_fields(cfg);
  return jones::inner(b, a);
}

double analytic_visibility(const MziConfig& cfg) {
  cfg.validate();
  const auto [a, b] = arm_fields(cfg);
  const double total = a.norm_squared() + b.norm_squared();
  if (total <= 0.0) throw DegenerateScan("analytic_visibility: no light reaches the detector");
  return 2.0 * std::abs(jones::inner(b, a)) / total;
}

VisibilityResult visibility_phase_scan(MziConfig cfg, std::size_t n_steps, PhaseMode mode) {
  if (n_steps < 8) throw InvalidArgument("visibility_phase_scan needs at least 8 steps");
  cfg.validate();

  // Project the scan onto {1, cos, sin}. I_d(eps) has no higher harmonics.
  double sum0 = 0.0;
  double sum_c = 0.0;
  double sum_s = 0.0;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n_steps);
  for (std::size_t j = 0; j < n_steps; ++j) {
    const double eps = step * static_cast<double>(j);
    cfg.epsilon = eps;
    const double intensity = intensity_d(cfg);
    sum0 += intensity;
    sum_c += intensity * std::cos(eps);
    sum_s += intensity * std::sin(eps);
  }
  const double n = static_cast<double>(n_steps);
  const double mean = sum0 / n;
  const double b = 2.0 * sum_c / n;
  const double c = 2.0 * sum_s / n;
  const double amplitude = std::hypot(b, c);
  const double max_i = mean + amplitude;
  const double min_i = mean - amplitude;
  if (max_i + min_i < 1e-15) throw DegenerateScan("visibility_phase_scan: max + min intensity vanishes");

  VisibilityResult result;
  result.visibility = (max_i - min_i) / (max_i + min_i);
  if (mode == PhaseMode::stabilized) result.phase_shift = wrap_phase(std::atan2(c, b));
  result.r_squared_mean = arm_fields(cfg).a.norm_squared();
  return result;
}

double measure_r_squared(const JonesVector& psi, const JonesMatrix& r) {
  if (!r.is_hermitian()) throw NotHermitian("measure_r_squared: R must be Hermitian");
  if (!psi.is_normalized()) throw NotNormalized("measure_r_squared: psi is not normalized");
  return (r * psi).norm_squared();
}

double infer_z(double visibility, double r_squared) {
  if (!std::isfinite(visibility) || visibility < 0.0) {
    throw InvalidArgument("infer_z: visibility must be finite and non-negative");
  }
  return visibility * (1.0 + r_squared) / 2.0;
}

WeakValueInference infer_weak_value(double v_with_r, double v_without_r, double r_squared) {
  if (!(v_without_r > 0.0)) {
    throw OrthogonalSelection("infer_weak_value: visibility without R is zero (orthogonal post-selection)");
  }
  WeakValueInference out;
  out.magnitude = infer_z(v_with_r, r_squared) / v_without_r;
  out.amplification_region = v_without_r < kAmplificationThreshold;
  return out;
}

std::vector<TheoryRow> theory_sweep(std::span<const double> thetas,
                                    const std::optional<ImperfectionModel>& imperfection) {
  const JonesVector psi = JonesVector::diagonal();
  const double r_squared = measure_r_squared(psi, jones::projector_h());

  std::vector<TheoryRow> rows;
  rows.reserve(thetas.size());
  for (const double theta : thetas) {
    MziConfig with_r = MziConfig::polarizer_hwp_setup(theta, true);
    MziConfig without_r = MziConfig::polarizer_hwp_setup(theta, false);
    with_r.imperfection = imperfection;
    without_r.imperfection = imperfection;

    TheoryRow row;
    row.theta = theta;
    row.v_with_r = analytic_visibility(with_r);
    row.v_without_r = analytic_visibility(without_r);
    row.z_abs = infer_z(row.v_with_r, r_squared);
    row.overlap = jones::expectation(jones::hwp(theta), psi).real();
    if (row.v_without_r >= jones::kOrthogonalityTol) {
      const auto wv = infer_weak_value(row.v_with_r, row.v_without_r, r_squared);
      row.weak_value_abs = wv.magnitude;
      row.amplification_region = wv.amplification_region;
    } else {
      row.amplification_region = true;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mzweak::mzi
