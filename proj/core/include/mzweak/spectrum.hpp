#pragma once

#include <complex>
#include <span>

namespace mzweak::spectrum {

/// Angular frequency (rad/sample) of the strongest spectral line of the
/// mean-subtracted samples at or above `min_omega`. Refined between bins by a
/// log-parabola through the three bins around the maximum of a 4x zero-padded
/// FFT, which is exact for Gaussian-windowed sinusoids. Returns 0 when no bin
/// qualifies.
double dominant_frequency(std::span<const double> samples, double min_omega);

/// White-noise standard deviation estimated from the median spectral power in
/// the band [omega_from, pi]; the median ignores a narrow fringe peak inside the
/// band. Returns 0 when the band is empty.
double high_band_noise(std::span<const double> samples, double omega_from);

/// sum_i (samples[i] - baseline[i]) exp(-i omega (i - origin)).
std::complex<double> demodulate(std::span<const double> samples, std::span<const double> baseline,
                                double omega, double origin);

}  // namespace mzweak::spectrum
