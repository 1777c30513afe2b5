#include "mzweak/spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <vector>

namespace mzweak::spectrum {

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// FFTW planning is not thread-safe; execution with fresh buffers is.
fftw_plan plan_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(n / 2 + 1));
  const fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
  plans.emplace(n, plan);
  return plan;
}

/// |Y_j|^2 of the zero-padded samples, j = 0 .. n_fft / 2, after removing the
/// straight line through the averaged end samples. Subtracting the mean instead
/// would leave a box of height -mean whose sinc leakage can swamp weak fringes.
std::vector<double> power_spectrum(std::span<const double> samples, std::size_t& n_fft) {
  const std::size_t n = samples.size();
  n_fft = std::bit_ceil(4 * n);
  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n_fft));
  std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(n_fft / 2 + 1));
  const std::size_t m = std::max<std::size_t>(1, std::min<std::size_t>(8, n / 8));
  const double left = std::accumulate(samples.begin(), samples.begin() + m, 0.0) / static_cast<double>(m);
  const double right = std::accumulate(samples.end() - m, samples.end(), 0.0) / static_cast<double>(m);
  const double x_left = 0.5 * static_cast<double>(m - 1);
  const double x_right = static_cast<double>(n - 1) - x_left;
  const double slope = x_right > x_left ? (right - left) / (x_right - x_left) : 0.0;
  for (std::size_t i = 0; i < n_fft; ++i) {
    in.get()[i] = i < n ? samples[i] - (left + slope * (static_cast<double>(i) - x_left)) : 0.0;
  }
  fftw_execute_dft_r2c(plan_for(n_fft), in.get(), out.get());
  std::vector<double> power(n_fft / 2 + 1);
  for (std::size_t j = 0; j < power.size(); ++j) {
    power[j] = out.get()[j][0] * out.get()[j][0] + out.get()[j][1] * out.get()[j][1];
  }
  return power;
}

}  // namespace

double dominant_frequency(std::span<const double> samples, double min_omega) {
  if (samples.size() < 4) return 0.0;
  std::size_t n_fft = 0;
  const std::vector<double> power = power_spectrum(samples, n_fft);
  const double bin = 2.0 * std::numbers::pi / static_cast<double>(n_fft);
  const auto first = static_cast<std::size_t>(std::max(1.0, std::ceil(min_omega / bin)));
  if (first + 1 >= power.size()) return 0.0;

  std::size_t best = first;
  for (std::size_t j = first; j < power.size(); ++j) {
    if (power[j] > power[best]) best = j;
  }
  double offset = 0.0;
  if (best > 0 && best + 1 < power.size() && power[best - 1] > 0.0 && power[best + 1] > 0.0) {
    const double lm = std::log(power[best - 1]);
    const double l0 = std::log(power[best]);
    const double lp = std::log(power[best + 1]);
    const double curvature = lm - 2.0 * l0 + lp;
    if (curvature < 0.0) offset = std::clamp(0.5 * (lm - lp) / curvature, -0.5, 0.5);
  }
  return (static_cast<double>(best) + offset) * bin;
}

double high_band_noise(std::span<const double> samples, double omega_from) {
  if (samples.size() < 4) return 0.0;
  std::size_t n_fft = 0;
  const std::vector<double> power = power_spectrum(samples, n_fft);
  const double bin = 2.0 * std::numbers::pi / static_cast<double>(n_fft);
  const auto first = static_cast<std::size_t>(std::max(1.0, std::ceil(omega_from / bin)));
  if (first >= power.size()) return 0.0;
  std::vector<double> band(power.begin() + static_cast<std::ptrdiff_t>(first), power.end());
  auto mid = band.begin() + static_cast<std::ptrdiff_t>(band.size() / 2);
  std::nth_element(band.begin(), mid, band.end());
  // White-noise periodogram bins are exponential: median = ln 2 * mean.
  const double mean_power = *mid / std::numbers::ln2;
  return std::sqrt(mean_power / static_cast<double>(samples.size()));
}

std::complex<double> demodulate(std::span<const double> samples, std::span<const double> baseline,
                                double omega, double origin) {
  std::complex<double> acc{};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double d = samples[i] - (baseline.empty() ? 0.0 : baseline[i]);
    const double ph = -omega * (static_cast<double>(i) - origin);
    acc += d * std::complex<double>(std::cos(ph), std::sin(ph));
  }
  return acc;
}

}  // namespace mzweak::spectrum
