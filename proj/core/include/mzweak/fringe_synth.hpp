#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "mzweak/mzi.hpp"

namespace mzweak::fringe {

/// Where the cosine phase is referenced.
///   envelope_centered: cos(k (x - mu) + alpha)
///   literal:           cos(k x + alpha)
enum class PhaseConvention { envelope_centered, literal };

/// A0 exp(-(x - mu)^2 / (2 sigma^2)) (1 + V cos(phase(x)))
struct FringeModelParams {
  double a0 = 1.0;
  double mu = 512.0;      // pixels
  double sigma = 120.0;   // pixels
  double v = 0.0;
  double k = 0.25;        // rad / pixel
  double alpha = 0.0;     // rad
  PhaseConvention convention = PhaseConvention::envelope_centered;

  void validate() const;
  double envelope(double x) const;
  double phase(double x) const;
  double operator()(double x) const;
};

struct DetectorConfig {
  std::size_t n_pixels = 1024;
  double pixel_half_width = 0.0;   // half of the pixel aperture, pixels
  double read_noise_std = 0.01;    // relative to a0
  bool shot_noise = false;
  double photons_per_unit = 1e4;   // shot-noise scale: counts per unit intensity
  std::uint64_t seed = 0;

  void validate() const;
};

/// Two Gaussian beams meeting at a small angle on the detector.
/// Field envelopes are chosen so each beam's intensity has std sigma_i.
struct TwoBeamConfig {
  double amp1 = 1.0;
  double amp2 = 1.0;
  double center1 = 512.0;
  double center2 = 512.0;
  double sigma1 = 120.0;
  double sigma2 = 120.0;
  double tilt_k = 0.25;
  double rel_phase = 0.0;

  void validate() const;
  double intensity(double x) const;
};

struct FringeProfile {
  std::vector<double> intensities;  // sample i sits at pixel centre x = i
  DetectorConfig detector;
  std::optional<FringeModelParams> truth;
};

/// Point samples of the model at pixel centres; no averaging, no noise.
FringeProfile ideal_profile(const FringeModelParams& p, const DetectorConfig& det);

FringeProfile two_beam_profile(const TwoBeamConfig& tb, const DetectorConfig& det);

/// Single-envelope parameters a coincident, equal-width beam pair reduces to
/// (envelope-centred phase). Throws InvalidArgument if the beams differ in
/// centre or width.
FringeModelParams two_beam_equivalent(const TwoBeamConfig& tb);

/// Mean intensity over each pixel window [x - w, x + w], by adaptive quadrature.
FringeProfile pixel_average(const std::function<double(double)>& intensity, const DetectorConfig& det);
FringeProfile pixel_average(const FringeModelParams& p, const DetectorConfig& det);
FringeProfile pixel_average(const TwoBeamConfig& tb, const DetectorConfig& det);

/// sin(k w) / (k w): fringe contrast left after a boxcar of half width w.
double pixel_attenuation(double k, double half_width);

enum class FramePhase { unstabilized, stabilized, drift };

struct FrameOptions {
  FramePhase phase = FramePhase::unstabilized;
  double drift_step = 0.1;                       // rad, std of each drift increment
  double drift_bound = std::numbers::pi / 4.0;   // rad, walk reflects at alpha0 +- bound
};

/// Model parameters an interferometer configuration produces on the detector.
/// V is the interferometer visibility, A0 scales with the light reaching port d,
/// and alpha = arg z - epsilon, so arg z = alpha + epsilon.
FringeModelParams params_from_mzi(const mzi::MziConfig& cfg, const FringeModelParams& envelope);

/// `n_frames` profiles. Each frame draws from its own RNG stream derived from
/// (det.seed, frame index), so output does not depend on scheduling.
std::vector<FringeProfile> generate_frames(const FringeModelParams& base, const DetectorConfig& det,
                                           std::size_t n_frames, const FrameOptions& options = {});
std::vector<FringeProfile> generate_frames(const mzi::MziConfig& cfg, const FringeModelParams& envelope,
                                           const DetectorConfig& det, std::size_t n_frames,
                                           const FrameOptions& options = {});

/// Shot noise (when enabled) then Gaussian read noise of std det.read_noise_std * scale,
/// drawn from the stream seeded by `stream_seed`.
void apply_detector_noise(std::vector<double>& samples, double scale, const DetectorConfig& det,
                          std::uint64_t stream_seed);

/// 64-bit stream seed for (seed, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace mzweak::fringe
