#pragma once

#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "mzweak/jones.hpp"

namespace mzweak::mzi {

using jones::Complex;
using jones::JonesMatrix;
using jones::JonesVector;

/// Polarization error picked up at reflections.
///
/// Each of three reflections (first beam-splitter face, mirror a, mirror b) is
/// a retarder with fast axis `axis` and retardance `retardance`. Arm b sees the
/// beam-splitter face and its mirror before its operator; arm a sees its
/// mirror after R. When enabled, each arm carries a compensating plate at
/// `compensation_axis` whose retardance is minus that arm's accumulated
/// reflection retardance (-retardance after mirror a, -2 retardance ahead of
/// arm b's operator); at compensation_axis == axis the ideal interferometer is
/// restored exactly.
struct ImperfectionModel {
  double retardance = 0.0;  // radians per reflection, in [0, pi]
  double axis = std::numbers::pi / 4.0;
  std::optional<double> compensation_axis;

  void validate() const;
};

struct MziConfig {
  JonesVector psi = JonesVector::diagonal();
  JonesMatrix arm_a = JonesMatrix::identity();  // R
  JonesMatrix arm_b = JonesMatrix::identity();  // U^H
  double epsilon = 0.0;
  std::optional<ImperfectionModel> imperfection;

  void validate() const;

  /// Arm a holds R, arm b holds U^H of the polar decomposition of `a`.
  static MziConfig for_operator(const JonesMatrix& a, const JonesVector& psi, double epsilon = 0.0);

  /// Polarizer (R = Pi_H) in arm a, half-wave plate at `theta` in arm b, input |+>.
  /// With `with_r` false the polarizer is removed (arm a is the identity).
  static MziConfig polarizer_hwp_setup(double theta, bool with_r = true, double epsilon = 0.0);
};

/// Unnormalized polarization amplitudes at the two output ports.
struct PortState {
  JonesVector c;
  JonesVector d;
};

PortState propagate(const MziConfig& cfg);
double intensity_c(const MziConfig& cfg);
double intensity_d(const MziConfig& cfg);

/// Field reaching the second beam splitter from each arm, imperfections included.
struct ArmFields {
  JonesVector a;
  JonesVector b;
};
ArmFields arm_fields(const MziConfig& cfg);

/// z = <b|a>: the interference term. Equals <psi|U R|psi> for the ideal setup.
Complex arm_overlap(const MziConfig& cfg);

/// 2|z| / (|a|^2 + |b|^2), from the closed form.
double analytic_visibility(const MziConfig& cfg);

enum class PhaseMode { stabilized, unstabilized };

struct VisibilityResult {
  double visibility = 0.0;
  std::optional<double> phase_shift;  // arg z; only reported when stabilized
  double r_squared_mean = 0.0;        // <R^2> = |R psi|^2
};

/// Scan epsilon over n_steps uniform points in [0, 2 pi) and read visibility
/// and phase off the scanned intensities. The scan is a pure first harmonic,
/// so its extrema are located from the harmonic reconstruction of the samples.
VisibilityResult visibility_phase_scan(MziConfig cfg, std::size_t n_steps,
                                       PhaseMode mode = PhaseMode::stabilized);

/// <R^2> = |R psi|^2 (power throughput). Throws NotHermitian.
double measure_r_squared(const JonesVector& psi, const JonesMatrix& r);

/// |z| = V (1 + <R^2>) / 2.
double infer_z(double visibility, double r_squared);

inline constexpr double kAmplificationThreshold = 1e-3;

struct WeakValueInference {
  double magnitude = 0.0;
  bool amplification_region = false;  // v_without_r below kAmplificationThreshold
};

/// |R_w| = [V_R (1 + <R^2>) / 2] / V_noR. Throws OrthogonalSelection when V_noR <= 0.
WeakValueInference infer_weak_value(double v_with_r, double v_without_r, double r_squared);

struct TheoryRow {
  double theta = 0.0;  // radians
  double v_with_r = 0.0;
  double v_without_r = 0.0;
  double z_abs = 0.0;
  std::optional<double> weak_value_abs;  // empty when the overlap vanishes
  bool amplification_region = false;
  double overlap = 0.0;  // Re <phi|psi>
};

/// Closed-form tabulation of the polarizer/half-wave-plate experiment.
std::vector<TheoryRow> theory_sweep(std::span<const double> thetas,
                                    const std::optional<ImperfectionModel>& imperfection = std::nullopt);

}  // namespace mzweak::mzi
