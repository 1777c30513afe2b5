#include "mzweak/fringe_synth.hpp"

#include <cmath>
#include <random>

#include "mzweak/errors.hpp"
#include "mzweak/parallel.hpp"
#include "quadrature.hpp"

namespace mzweak::fringe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

FringeProfile sample(const std::function<double(double)>& intensity, const DetectorConfig& det) {
  FringeProfile profile;
  profile.detector = det;
  profile.intensities.resize(det.n_pixels);
  for (std::size_t i = 0; i < det.n_pixels; ++i) profile.intensities[i] = intensity(static_cast<double>(i));
  return profile;
}

void add_noise(std::vector<double>& samples, double a0, const DetectorConfig& det, std::mt19937_64& rng) {
  if (det.shot_noise) {
    for (double& s : samples) {
      const double mean = std::max(s, 0.0) * det.photons_per_unit;
      std::poisson_distribution<long long> counts(mean > 0.0 ? mean : 1e-300);
      s = mean > 0.0 ? static_cast<double>(counts(rng)) / det.photons_per_unit : 0.0;
    }
  }
  if (det.read_noise_std > 0.0) {
    std::normal_distribution<double> read(0.0, det.read_noise_std * a0);
    for (double& s : samples) s += read(rng);
  }
}

}  // namespace

void FringeModelParams::validate() const {
  if (!(a0 > 0.0)) throw InvalidArgument("fringe model: a0 must be positive");
  if (!(sigma > 0.0)) throw InvalidArgument("fringe model: sigma must be positive");
  if (!(k > 0.0)) throw InvalidArgument("fringe model: k must be positive");
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("fringe model: visibility must lie in [0, 1]");
  if (!std::isfinite(mu) || !std::isfinite(alpha)) throw InvalidArgument("fringe model: mu and alpha must be finite");
}

double FringeModelParams::envelope(double x) const {
  const double u = (x - mu) / sigma;
  return a0 * std::exp(-0.5 * u * u);
}

double FringeModelParams::phase(double x) const {
  return convention == PhaseConvention::envelope_centered ? k * (x - mu) + alpha : k * x + alpha;
}

double FringeModelParams::operator()(double x) const { return envelope(x) * (1.0 + v * std::cos(phase(x))); }

void DetectorConfig::validate() const {
  if (n_pixels < 16) throw InvalidArgument("detector: need at least 16 pixels");
  if (!(pixel_half_width >= 0.0)) throw InvalidArgument("detector: pixel_half_width must be >= 0");
  if (!(read_noise_std >= 0.0)) throw InvalidArgument("detector: read_noise_std must be >= 0");
  if (shot_noise && !(photons_per_unit > 0.0)) throw InvalidArgument("detector: photons_per_unit must be positive");
}

void TwoBeamConfig::validate() const {
  if (!(amp1 >= 0.0 && amp2 >= 0.0)) throw InvalidArgument("two-beam: amplitudes must be >= 0");
  if (!(sigma1 > 0.0 && sigma2 > 0.0)) throw InvalidArgument("two-beam: widths must be positive");
}

double TwoBeamConfig::intensity(double x) const {
  const double u1 = (x - center1) / sigma1;
  const double u2 = (x - center2) / sigma2;
  const double e1 = amp1 * std::exp(-0.25 * u1 * u1);
  const double e2 = amp2 * std::exp(-0.25 * u2 * u2);
  return e1 * e1 + e2 * e2 + 2.0 * e1 * e2 * std::cos(tilt_k * x + rel_phase);
}

FringeProfile ideal_profile(const FringeModelParams& p, const DetectorConfig& det) {
  p.validate();
  det.validate();
  FringeProfile profile = sample(p, det);
  profile.truth = p;
  return profile;
}

FringeProfile two_beam_profile(const TwoBeamConfig& tb, const DetectorConfig& det) {
  tb.validate();
  det.validate();
  return sample([&tb](double x) { return tb.intensity(x); }, det);
}

FringeModelParams two_beam_equivalent(const TwoBeamConfig& tb) {
  tb.validate();
  if (tb.center1 != tb.center2 || tb.sigma1 != tb.sigma2) {
    throw InvalidArgument("two_beam_equivalent: beams must share centre and width");
  }
  const double power = tb.amp1 * tb.amp1 + tb.amp2 * tb.amp2;
  if (!(power > 0.0)) throw InvalidArgument("two_beam_equivalent: no light");
  FringeModelParams p;
  p.a0 = power;
  p.mu = tb.center1;
  p.sigma = tb.sigma1;
  p.v = 2.0 * tb.amp1 * tb.amp2 / power;
  p.k = tb.tilt_k;
  p.alpha = std::remainder(tb.tilt_k * tb.center1 + tb.rel_phase, kTwoPi);
  p.convention = PhaseConvention::envelope_centered;
  return p;
}

FringeProfile pixel_average(const std::function<double(double)>& intensity, const DetectorConfig& det) {
  det.validate();
  if (!(det.pixel_half_width > 0.0)) throw InvalidArgument("pixel_average: pixel_half_width must be positive");
  const double w = det.pixel_half_width;
  FringeProfile profile;
  profile.detector = det;
  profile.intensities.resize(det.n_pixels);
  for (std::size_t i = 0; i < det.n_pixels; ++i) {
    const double x = static_cast<double>(i);
    profile.intensities[i] = detail::integrate(intensity, x - w, x + w) / (2.0 * w);
  }
  return profile;
}

FringeProfile pixel_average(const FringeModelParams& p, const DetectorConfig& det) {
  p.validate();
  FringeProfile profile = pixel_average([&p](double x) { return p(x); }, det);
  profile.truth = p;
  return profile;
}

FringeProfile pixel_average(const TwoBeamConfig& tb, const DetectorConfig& det) {
  tb.validate();
  return pixel_average([&tb](double x) { return tb.intensity(x); }, det);
}

double pixel_attenuation(double k, double half_width) {
  const double x = k * half_width;
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

FringeModelParams params_from_mzi(const mzi::MziConfig& cfg, const FringeModelParams& envelope) {
  cfg.validate();
  const auto fields = mzi::arm_fields(cfg);
  const double arm_power = fields.a.norm_squared() + fields.b.norm_squared();
  FringeModelParams p = envelope;
  p.a0 = envelope.a0 * arm_power / 2.0;
  p.v = std::min(1.0, mzi::analytic_visibility(cfg));
  p.alpha = std::remainder(std::arg(mzi::arm_overlap(cfg)) - cfg.epsilon, kTwoPi);
  return p;
}

void apply_detector_noise(std::vector<double>& samples, double scale, const DetectorConfig& det,
                          std::uint64_t stream_seed) {
  det.validate();
  std::mt19937_64 rng(stream_seed);
  add_noise(samples, scale, det, rng);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

std::vector<FringeProfile> generate_frames(const FringeModelParams& base, const DetectorConfig& det,
                                           std::size_t n_frames, const FrameOptions& options) {
  base.validate();
  det.validate();
  if (n_frames < 1) throw InvalidArgument("generate_frames: need at least one frame");

  // Phases first: the drift walk is sequential, the rest is independent per frame.
  std::vector<double> alphas(n_frames, base.alpha);
  if (options.phase != FramePhase::stabilized) {
    double walk = base.alpha;
    for (std::size_t i = 0; i < n_frames; ++i) {
      std::mt19937_64 rng(derive_seed(det.seed, 2 * i));
      if (options.phase == FramePhase::unstabilized) {
        alphas[i] = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
      } else {
        if (i > 0) walk += std::normal_distribution<double>(0.0, options.drift_step)(rng);
        const double lo = base.alpha - options.drift_bound;
        const double hi = base.alpha + options.drift_bound;
        while (walk < lo || walk > hi) walk = walk < lo ? 2.0 * lo - walk : 2.0 * hi - walk;
        alphas[i] = walk;
      }
    }
  }

  std::vector<FringeProfile> frames(n_frames);
  parallel_for(n_frames, [&](std::size_t i) {
    FringeModelParams p = base;
    p.alpha = alphas[i];
    FringeProfile frame = det.pixel_half_width > 0.0 ? pixel_average(p, det) : ideal_profile(p, det);
    std::mt19937_64 rng(derive_seed(det.seed, 2 * i + 1));
    add_noise(frame.intensities, p.a0, det, rng);
    frame.truth = p;
    frames[i] = std::move(frame);
  });
  return frames;
}

std::vector<FringeProfile> generate_frames(const mzi::MziConfig& cfg, const FringeModelParams& envelope,
                                           const DetectorConfig& det, std::size_t n_frames,
                                           const FrameOptions& options) {
  return generate_frames(params_from_mzi(cfg, envelope), det, n_frames, options);
}

}  // namespace mzweak::fringe
