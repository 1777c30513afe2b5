#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mzweak/fringe_synth.hpp"

namespace mzweak::fringe {

struct ExtremaPoint {
  double pixel = 0.0;
  double intensity = 0.0;
};

/// Peaks and dips in pixel order. The two lists interleave.
struct ExtremaSet {
  std::vector<ExtremaPoint> peaks;
  std::vector<ExtremaPoint> dips;
};

struct ExtremaOptions {
  /// Moving-average window in pixels. Default: max(3, round(pi / (2 k))) with k
  /// the FFT fringe-frequency estimate, rounded up to odd.
  std::optional<std::size_t> smoothing_window;
  double prominence_fraction = 0.02;  // of the smoothed global range
};

/// Throws TooFewExtrema when fewer than 3 peaks or 3 dips survive.
ExtremaSet find_extrema(std::span<const double> samples, const ExtremaOptions& options = {});
ExtremaSet find_extrema(const FringeProfile& profile, const ExtremaOptions& options = {});

/// A exp(-a (x - x0)^2) through a set of points.
struct EnvelopeFit {
  double amplitude = 0.0;
  double width_param = 0.0;  // a
  double center = 0.0;       // x0
  double rms_residual = 0.0;
  int iterations = 0;
  /// Set when only the amplitude was fitted, with the shape taken from another fit.
  bool shared_shape = false;
};

/// Weighted log-parabola start, then damped least squares on the linear
/// residuals. Throws TooFewExtrema (< 3 points), DegenerateProfile (no
/// concave Gaussian fits) or NonConvergence.
EnvelopeFit fit_envelope(std::span<const ExtremaPoint> points, int max_iterations = 200);

/// Least-squares amplitude of a Gaussian with the centre and width of `shape`.
/// The amplitude may come out zero or negative when the points are noise.
EnvelopeFit fit_envelope_amplitude(std::span<const ExtremaPoint> points, const EnvelopeFit& shape);

/// (A_p - A_d) / (A_p + A_d)
double visibility_from_envelopes(const EnvelopeFit& peaks, const EnvelopeFit& dips);

struct EnvelopeVisibility {
  ExtremaSet extrema;
  EnvelopeFit peaks;
  EnvelopeFit dips;
  double visibility = 0.0;
};

/// Peak/dip envelope method end to end. When the dip envelope is below 5% of
/// the peak envelope (visibility above about 0.9), only its amplitude is fitted,
/// with the peak envelope's centre and width.
EnvelopeVisibility envelope_visibility(std::span<const double> samples, const ExtremaOptions& options = {});
EnvelopeVisibility envelope_visibility(const FringeProfile& profile, const ExtremaOptions& options = {});

struct FitOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
  double initial_damping = 1e-3;
  PhaseConvention convention = PhaseConvention::envelope_centered;
  /// Profiles whose max - min is below this multiple of the noise estimate are rejected.
  double min_dynamic_range = 10.0;
  /// V at or below this (or within 3 standard errors of zero) leaves alpha unidentified.
  double phase_visibility_threshold = 1e-3;
};

/// Parameter order for param_std and covariance.
enum FitParam : std::size_t { kA0 = 0, kMu, kSigma, kV, kK, kAlpha, kNumFitParams };

struct FitResult {
  FringeModelParams params;
  double rms_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::array<double, kNumFitParams> param_std{};
  std::array<std::array<double, kNumFitParams>, kNumFitParams> covariance{};
  bool visibility_out_of_range = false;  // fitted V > 1; reported, not clamped
  bool phase_identifiable = true;
};

/// Six-parameter least-squares fit of A0 exp(-(x-mu)^2/(2 sigma^2)) (1 + V cos(phase)).
/// Seeds k and alpha from the spectrum, A0, mu, sigma from the moments of the
/// one-period running mean, and V from complex demodulation at k.
/// Throws InvalidArgument (< 128 samples), DegenerateProfile or NonConvergence.
FitResult fit_full_model(std::span<const double> samples, const FitOptions& options = {});
FitResult fit_full_model(const FringeProfile& profile, const FitOptions& options = {});

/// Two independent Gaussian beams with a common fringe term, for profiles
/// whose beams are not coincident. Visibility is 2 a1 a2 / (a1^2 + a2^2).
struct TwoBeamFitResult {
  TwoBeamConfig beams;  // rel_phase is referenced to x = 0
  double visibility = 0.0;
  double rms_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

TwoBeamFitResult fit_two_beam(std::span<const double> samples, const FitOptions& options = {});

enum class FitMethod { envelope, full_model, two_beam };

/// Fitted visibility of one frame by the chosen method.
double fit_visibility(std::span<const double> samples, FitMethod method, const FitOptions& options = {});

struct SweepStatistics {
  double theta = 0.0;  // radians
  double visibility_mean = 0.0;
  double visibility_std = 0.0;   // frame-to-frame scatter (sample std)
  std::size_t n_frames = 0;      // frames that fitted successfully
  std::size_t n_failed = 0;
  FitMethod method = FitMethod::full_model;
  bool out_of_range = false;     // mean outside [0, 1]
  /// Mean per-frame standard error of V from the fit covariance (full model only).
  std::optional<double> mean_fit_std;
  /// Circular mean and circular standard deviation of the fitted alpha (full
  /// model only). Meaningful when the frames share a stabilized phase.
  std::optional<double> phase_mean;
  std::optional<double> phase_std;
};

struct SweepPoint {
  double theta = 0.0;  // radians
  std::vector<FringeProfile> frames;
};

/// Fits every frame (in parallel) and reduces in frame order. Needs at least two
/// frames and at least half of them fitting; otherwise the first frame error is
/// rethrown.
SweepStatistics aggregate_frames(double theta, std::span<const FringeProfile> frames, FitMethod method,
                                 const FitOptions& options = {});

std::vector<SweepStatistics> aggregate_sweep(std::span<const SweepPoint> sweep, FitMethod method,
                                             const FitOptions& options = {});

}  // namespace mzweak::fringe
