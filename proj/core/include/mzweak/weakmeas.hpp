#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mzweak/jones.hpp"

namespace mzweak::weakmeas {

using jones::Complex;
using jones::JonesMatrix;
using jones::JonesVector;

enum class Component { H, V };

inline constexpr double kDefaultBeamSigma = 500e-6;  // metres
inline constexpr double kWeakRatio = 0.01;           // a / sigma
inline constexpr double kRealisticRatio = 0.2;

/// Beam-displacer measurement of the polarization projector: one linear
/// component is shifted transversely by `displacement_a`, the other passes.
struct WeakMeasConfig {
  JonesVector psi = JonesVector::diagonal();
  JonesVector phi = JonesVector::diagonal();
  double displacement_a = kWeakRatio * kDefaultBeamSigma;
  double beam_sigma = kDefaultBeamSigma;  // std of the beam intensity profile
  Component displaced = Component::V;

  void validate() const;

  static WeakMeasConfig from_ratio(const JonesVector& psi, const JonesVector& phi, double a_over_sigma,
                                   double beam_sigma = kDefaultBeamSigma, Component displaced = Component::V);
};

/// Post-selected pointer: c_undisplaced G(x) + c_displaced G(x - a), with G a
/// Gaussian amplitude whose square has std sigma.
struct PointerState {
  Complex c_undisplaced;
  Complex c_displaced;
  double norm = 0.0;  // integral of the density
  double displacement = 0.0;
  double sigma = 0.0;

  /// Unnormalized pointer density |psi(x)|^2.
  double density(double x) const;
};

/// Throws ZeroPostSelection when both amplitudes are below 1e-15.
PointerState pointer_after_postselection(const WeakMeasConfig& cfg);

/// exp(-a^2 / (8 sigma^2)): overlap of the two displaced pointer amplitudes.
double pointer_overlap(double a, double sigma);

/// Closed-form mean position of the post-selected pointer.
double centroid_exact(const WeakMeasConfig& cfg);

/// Mean conjugate momentum of the post-selected pointer, integrated numerically
/// over the momentum-space density (hbar = 1).
double momentum_centroid(const WeakMeasConfig& cfg);

/// Optional linear map applied to centroid / a before it is read as a weak value.
struct EigenRangeMap {
  double slope = 1.0;
  double offset = 0.0;
  double apply(double x) const { return slope * x + offset; }
};

struct WeakValueEstimate {
  double centroid = 0.0;
  double inferred_weak_value_re = 0.0;  // of the projector on the displaced component
  double inferred_complement_re = 0.0;  // 1 - the above
  bool exact = true;                    // closed form, not a weak-limit expansion
};

/// Re <Pi_displaced>_w = centroid / a; the other projector gets 1 minus that.
/// Throws InvalidArgument for a <= 0 and ZeroPostSelection.
WeakValueEstimate inferred_weak_value(const WeakMeasConfig& cfg, const EigenRangeMap& map = {});

/// <phi|Pi|psi> / <phi|psi> for Pi the projector on `component`.
/// Throws OrthogonalSelection when the overlap vanishes.
Complex exact_weak_value(const JonesVector& psi, const JonesVector& phi, Component component);

struct WeakSweepOptions {
  double a_over_sigma = kWeakRatio;
  double beam_sigma = kDefaultBeamSigma;
  Component displaced = Component::V;
  EigenRangeMap map;
  double centroid_noise_std = 0.0;  // metres, Gaussian noise on each simulated centroid
  std::uint64_t seed = 0;
};

struct WeakSweepRow {
  double theta = 0.0;  // radians
  double centroid_over_a = 0.0;
  double weak_value_h_inferred = 0.0;
  std::optional<double> weak_value_h_exact;  // empty at orthogonal post-selection
  double overlap = 0.0;                      // Re <phi|psi> = sin 2 theta
  double expectation_inferred = 0.0;         // inferred weak value times overlap
  double expectation_exact = 0.0;            // <psi|A|psi>
  bool amplification_region = false;
};

/// Input |+>, post-selection phi(theta) = H(theta)|+> with H a half-wave plate,
/// and R = Pi_H, so A(theta) = H(theta) Pi_H. Rows are independent of thread
/// scheduling; noise streams are keyed by row index.
std::vector<WeakSweepRow> expectation_of_A_via_weakmeas(std::span<const double> thetas,
                                                        const WeakSweepOptions& options = {});

}  // namespace mzweak::weakmeas
