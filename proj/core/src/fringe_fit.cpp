#include "mzweak/fringe_fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <string>

#include "levenberg_marquardt.hpp"
#include "mzweak/errors.hpp"
#include "mzweak/parallel.hpp"
#include "mzweak/spectrum.hpp"

namespace mzweak::fringe {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2Pi = 2.5066282746310002;

double wrap_phase(double x) {
  double w = std::remainder(x, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

std::size_t odd_at_least(double w, std::size_t lo) {
  auto n = static_cast<std::size_t>(std::max(std::llround(w), 0LL));
  n = std::max(n, lo);
  return n % 2 == 0 ? n + 1 : n;
}

/// Centred running mean; windows are truncated at the ends.
std::vector<double> running_mean(std::span<const double> y, std::size_t window) {
  const std::size_t n = y.size();
  const std::size_t half = window / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + y[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

struct Moments {
  double mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments(std::span<const double> w) {
  Moments m;
  double sx = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    m.mass += w[i];
    sx += w[i] * static_cast<double>(i);
  }
  if (!(m.mass > 0.0)) return m;
  m.mean = sx / m.mass;
  double sxx = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = static_cast<double>(i) - m.mean;
    sxx += w[i] * d * d;
  }
  m.variance = sxx / m.mass;
  return m;
}

/// Fringe frequency estimate with the search floor set above the envelope's own spectrum.
double estimate_frequency(std::span<const double> y) {
  const Moments m = moments(y);
  const double sigma0 = m.variance > 0.0 ? std::sqrt(m.variance) : static_cast<double>(y.size()) / 6.0;
  return spectrum::dominant_frequency(y, 4.0 / sigma0);
}

/// Vertex of the least-squares parabola through y[i - h .. i + h]. Falls back to
/// the sample itself when the parabola has the wrong curvature or its vertex
/// leaves the window.
ExtremaPoint refine(std::span<const double> y, std::size_t i, std::size_t h, bool is_peak) {
  const std::size_t lo = i >= h ? i - h : 0;
  const std::size_t hi = std::min(y.size() - 1, i + h);
  ExtremaPoint fallback{static_cast<double>(i), y[i]};
  if (hi - lo < 2) return fallback;
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d aty = Eigen::Vector3d::Zero();
  for (std::size_t j = lo; j <= hi; ++j) {
    const double t = static_cast<double>(j) - static_cast<double>(i);
    const Eigen::Vector3d row(1.0, t, t * t);
    ata += row * row.transpose();
    aty += row * y[j];
  }
  const Eigen::Vector3d c = ata.ldlt().solve(aty);
  if (!c.allFinite() || (is_peak ? c[2] >= 0.0 : c[2] <= 0.0)) return fallback;
  const double t_star = -c[1] / (2.0 * c[2]);
  if (std::abs(t_star) > static_cast<double>(h)) return fallback;
  return {static_cast<double>(i) + t_star, c[0] + c[1] * t_star + c[2] * t_star * t_star};
}

void require_converged(const detail::LmResult& lm, const char* what) {
  if (!lm.converged) {
    throw NonConvergence(std::string(what) + ": no convergence after " + std::to_string(lm.iterations) +
                         " iterations");
  }
}

/// Residuals and Jacobian of the envelope-centred six-parameter model.
struct FullModel {
  std::span<const double> y;

  void operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
    const auto n = static_cast<Eigen::Index>(y.size());
    r.resize(n);
    if (jac) jac->resize(n, kNumFitParams);
    const double a0 = p[kA0];
    const double mu = p[kMu];
    const double sigma = p[kSigma];
    const double v = p[kV];
    const double k = p[kK];
    const double alpha = p[kAlpha];
    const double inv_sigma = 1.0 / sigma;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dx = static_cast<double>(i) - mu;
      const double u = dx * inv_sigma;
      const double g = std::exp(-0.5 * u * u);
      const double ph = k * dx + alpha;
      const double c = std::cos(ph);
      const double f = 1.0 + v * c;
      const double ag = a0 * g;
      r[i] = ag * f - y[static_cast<std::size_t>(i)];
      if (jac) {
        const double s = std::sin(ph);
        auto& J = *jac;
        J(i, kA0) = g * f;
        J(i, kMu) = ag * (u * inv_sigma * f + v * s * k);
        J(i, kSigma) = ag * u * u * inv_sigma * f;
        J(i, kV) = ag * c;
        J(i, kK) = -ag * v * s * dx;
        J(i, kAlpha) = -ag * v * s;
      }
    }
  }
};

struct EnvelopeModel {
  std::span<const double> u;
  std::span<const double> y;

  void operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
    const auto n = static_cast<Eigen::Index>(u.size());
    r.resize(n);
    if (jac) jac->resize(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = u[static_cast<std::size_t>(i)] - p[2];
      const double e = std::exp(-p[1] * d * d);
      r[i] = p[0] * e - y[static_cast<std::size_t>(i)];
      if (jac) {
        (*jac)(i, 0) = e;
        (*jac)(i, 1) = -p[0] * e * d * d;
        (*jac)(i, 2) = 2.0 * p[0] * p[1] * d * e;
      }
    }
  }
};

struct TwoBeamModel {
  std::span<const double> y;
  double x_ref = 0.0;

  double intensity(const Eigen::VectorXd& p, double x) const {
    const double u1 = (x - p[2]) / p[4];
    const double u2 = (x - p[3]) / p[5];
    const double e1 = p[0] * std::exp(-0.25 * u1 * u1);
    const double e2 = p[1] * std::exp(-0.25 * u2 * u2);
    return e1 * e1 + e2 * e2 + 2.0 * e1 * e2 * std::cos(p[6] * (x - x_ref) + p[7]);
  }

  void operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
    const auto n = static_cast<Eigen::Index>(y.size());
    r.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = intensity(p, static_cast<double>(i)) - y[static_cast<std::size_t>(i)];
    if (!jac) return;
    jac->resize(n, p.size());
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      const double h = 1e-6 * std::max(std::abs(p[j]), 1e-3);
      Eigen::VectorXd hi = p;
      Eigen::VectorXd lo = p;
      hi[j] += h;
      lo[j] -= h;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i);
        (*jac)(i, j) = (intensity(hi, x) - intensity(lo, x)) / (2.0 * h);
      }
    }
  }
};

detail::LmOptions lm_options(const FitOptions& o) {
  return {o.max_iterations, o.initial_damping, o.relative_tolerance};
}

struct Seed {
  double k = 0.0;
  FringeModelParams params;
};

Seed seed_full_model(std::span<const double> y, const FitOptions& options) {
  const std::size_t n = y.size();
  const Moments raw = moments(y);
  if (!(raw.mass > 0.0)) throw DegenerateProfile("fit_full_model: profile carries no light");
  const double sigma0 = raw.variance > 0.0 ? std::sqrt(raw.variance) : static_cast<double>(n) / 6.0;
  double k = spectrum::dominant_frequency(y, 4.0 / sigma0);
  if (!(k > 0.0)) k = kPi / 2.0;

  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double range = *hi - *lo;
  const double noise = spectrum::high_band_noise(y, kPi / 2.0);
  if (!(range > 0.0) || range < options.min_dynamic_range * noise) {
    throw DegenerateProfile("fit_full_model: dynamic range " + std::to_string(range) +
                            " is below the noise floor (noise estimate " + std::to_string(noise) + ")");
  }

  // Envelope from the moments of the one-period running mean.
  const double period = 2.0 * kPi / k;
  const std::size_t window = std::min(odd_at_least(period, 1), n / 4 | 1);
  const std::vector<double> midline = running_mean(y, window);
  const Moments env = moments(midline);
  double var = env.variance - static_cast<double>(window * window) / 12.0;
  if (!(var > 0.0)) var = env.variance > 0.0 ? env.variance : sigma0 * sigma0;

  FringeModelParams p;
  p.mu = env.mass > 0.0 ? env.mean : raw.mean;
  p.sigma = std::sqrt(var);
  p.a0 = std::max(env.mass, raw.mass) / (p.sigma * kSqrt2Pi);
  p.k = k;

  // Visibility and phase by demodulating what the envelope leaves behind.
  std::vector<double> baseline(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) - p.mu) / p.sigma;
    baseline[i] = p.a0 * std::exp(-0.5 * u * u);
  }
  const auto d = spectrum::demodulate(y, baseline, k, p.mu);
  p.v = std::clamp(2.0 * std::abs(d) / (p.a0 * p.sigma * kSqrt2Pi), 1e-3, 1.0);
  p.alpha = std::arg(d);
  return {k, p};
}

}  // namespace

ExtremaSet find_extrema(std::span<const double> y, const ExtremaOptions& options) {
  if (y.size() < 64) throw InvalidArgument("find_extrema: need at least 64 samples");
  const double k = estimate_frequency(y);
  const std::size_t window = options.smoothing_window
                                 ? odd_at_least(static_cast<double>(*options.smoothing_window), 1)
                                 : odd_at_least(k > 0.0 ? kPi / (2.0 * k) : 3.0, 3);
  const std::vector<double> s = running_mean(y, window);
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  const double delta = options.prominence_fraction * (*hi - *lo);
  if (!(delta > 0.0)) throw TooFewExtrema("find_extrema: flat profile");

  // Alternating hysteresis detector: an extremum is committed once the signal
  // has moved `delta` away from it, so peaks and dips interleave by construction.
  std::vector<std::size_t> peak_idx;
  std::vector<std::size_t> dip_idx;
  double mx = -std::numeric_limits<double>::infinity();
  double mn = std::numeric_limits<double>::infinity();
  std::size_t mx_pos = 0;
  std::size_t mn_pos = 0;
  bool looking_for_max = true;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = s[i];
    if (v > mx) {
      mx = v;
      mx_pos = i;
    }
    if (v < mn) {
      mn = v;
      mn_pos = i;
    }
    if (looking_for_max && v < mx - delta) {
      peak_idx.push_back(mx_pos);
      mn = v;
      mn_pos = i;
      looking_for_max = false;
    } else if (!looking_for_max && v > mn + delta) {
      dip_idx.push_back(mn_pos);
      mx = v;
      mx_pos = i;
      looking_for_max = true;
    }
  }

  const auto h = static_cast<std::size_t>(
      k > 0.0 ? std::max(1LL, std::llround(2.0 * kPi / k / 12.0)) : 1LL);
  ExtremaSet out;
  for (const std::size_t i : peak_idx) out.peaks.push_back(refine(y, i, h, true));
  for (const std::size_t i : dip_idx) out.dips.push_back(refine(y, i, h, false));
  if (out.peaks.size() < 3 || out.dips.size() < 3) {
    throw TooFewExtrema("find_extrema: found " + std::to_string(out.peaks.size()) + " peaks and " +
                        std::to_string(out.dips.size()) + " dips, need 3 of each");
  }
  return out;
}

ExtremaSet find_extrema(const FringeProfile& profile, const ExtremaOptions& options) {
  return find_extrema(std::span<const double>(profile.intensities), options);
}

EnvelopeFit fit_envelope(std::span<const ExtremaPoint> points, int max_iterations) {
  const std::size_t n = points.size();
  if (n < 3) throw TooFewExtrema("fit_envelope: need at least 3 points");

  double x_mean = 0.0;
  for (const auto& pt : points) x_mean += pt.pixel;
  x_mean /= static_cast<double>(n);
  double scale = 0.0;
  for (const auto& pt : points) scale = std::max(scale, std::abs(pt.pixel - x_mean));
  if (!(scale > 0.0)) throw DegenerateProfile("fit_envelope: points share one position");

  std::vector<double> u(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = (points[i].pixel - x_mean) / scale;
    y[i] = points[i].intensity;
  }

  // ln y = b0 + b1 u + b2 u^2, weighted by y^2 to undo the log's noise stretching.
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d aty = Eigen::Vector3d::Zero();
  std::size_t positive = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0.0)) continue;
    ++positive;
    const double w = y[i] * y[i];
    const Eigen::Vector3d row(1.0, u[i], u[i] * u[i]);
    ata += w * row * row.transpose();
    aty += w * row * std::log(y[i]);
  }
  Eigen::VectorXd p(3);
  const Eigen::Vector3d b = positive >= 3 ? Eigen::Vector3d(ata.ldlt().solve(aty)) : Eigen::Vector3d::Zero();
  if (positive >= 3 && b.allFinite() && b[2] < 0.0) {
    const double a = -b[2];
    const double u0 = b[1] / (2.0 * a);
    p << std::exp(b[0] + a * u0 * u0), a, u0;
  } else {
    double mass = 0.0;
    double su = 0.0;
    double suu = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::max(y[i], 0.0);
      mass += w;
      su += w * u[i];
      suu += w * u[i] * u[i];
    }
    if (!(mass > 0.0)) throw DegenerateProfile("fit_envelope: no positive points");
    const double mean = su / mass;
    const double var = suu / mass - mean * mean;
    if (!(var > 0.0)) throw DegenerateProfile("fit_envelope: points do not outline a Gaussian");
    p << *std::max_element(y.begin(), y.end()), 0.5 / var, mean;
  }

  detail::LmOptions opt;
  opt.max_iterations = max_iterations;
  const auto lm = detail::levenberg_marquardt(EnvelopeModel{u, y}, p, opt);
  require_converged(lm, "fit_envelope");

  EnvelopeFit fit;
  fit.amplitude = lm.params[0];
  fit.width_param = lm.params[1] / (scale * scale);
  fit.center = x_mean + lm.params[2] * scale;
  fit.rms_residual = std::sqrt(lm.cost / static_cast<double>(n));
  fit.iterations = lm.iterations;
  if (!(fit.amplitude > 0.0) || !(fit.width_param > 0.0)) {
    throw DegenerateProfile("fit_envelope: fitted Gaussian is not a bump");
  }
  return fit;
}

EnvelopeFit fit_envelope_amplitude(std::span<const ExtremaPoint> points, const EnvelopeFit& shape) {
  if (points.empty()) throw TooFewExtrema("fit_envelope_amplitude: no points");
  double sgy = 0.0;
  double sgg = 0.0;
  for (const auto& pt : points) {
    const double g = std::exp(-shape.width_param * (pt.pixel - shape.center) * (pt.pixel - shape.center));
    sgy += g * pt.intensity;
    sgg += g * g;
  }
  if (!(sgg > 0.0)) throw DegenerateProfile("fit_envelope_amplitude: points lie outside the envelope");
  EnvelopeFit fit = shape;
  fit.amplitude = sgy / sgg;
  fit.iterations = 0;
  fit.shared_shape = true;
  double ss = 0.0;
  for (const auto& pt : points) {
    const double r = pt.intensity -
                     fit.amplitude * std::exp(-shape.width_param * (pt.pixel - shape.center) * (pt.pixel - shape.center));
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(points.size()));
  return fit;
}

double visibility_from_envelopes(const EnvelopeFit& peaks, const EnvelopeFit& dips) {
  return (peaks.amplitude - dips.amplitude) / (peaks.amplitude + dips.amplitude);
}

EnvelopeVisibility envelope_visibility(std::span<const double> samples, const ExtremaOptions& options) {
  EnvelopeVisibility out;
  out.extrema = find_extrema(samples, options);
  out.peaks = fit_envelope(out.extrema.peaks);
  // A dip envelope this far below the peaks is mostly noise and its shape
  // cannot be resolved, so only its amplitude is fitted.
  constexpr double kBuriedDipRatio = 0.05;
  const auto shared = fit_envelope_amplitude(out.extrema.dips, out.peaks);
  out.dips = std::abs(shared.amplitude) < kBuriedDipRatio * out.peaks.amplitude ? shared : fit_envelope(out.extrema.dips);
  out.visibility = visibility_from_envelopes(out.peaks, out.dips);
  return out;
}

EnvelopeVisibility envelope_visibility(const FringeProfile& profile, const ExtremaOptions& options) {
  return envelope_visibility(std::span<const double>(profile.intensities), options);
}

FitResult fit_full_model(std::span<const double> y, const FitOptions& options) {
  if (y.size() < 128) throw InvalidArgument("fit_full_model: need at least 128 samples");
  const Seed seed = seed_full_model(y, options);

  Eigen::VectorXd p(kNumFitParams);
  p << seed.params.a0, seed.params.mu, seed.params.sigma, seed.params.v, seed.params.k, seed.params.alpha;
  // Below a couple of cycles per envelope width the cosine term can bend the
  // envelope instead of describing fringes, so k is kept above that band.
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(kNumFitParams, -inf);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(kNumFitParams, inf);
  lower[kK] = std::min(2.0 / seed.params.sigma, 0.5 * seed.k);
  upper[kK] = kPi;
  const auto lm = detail::levenberg_marquardt(FullModel{y}, p, lm_options(options), lower, upper);
  require_converged(lm, "fit_full_model");

  Eigen::VectorXd q = lm.params;
  Eigen::VectorXd flip = Eigen::VectorXd::Ones(kNumFitParams);
  if (q[kSigma] < 0.0) {
    q[kSigma] = -q[kSigma];
    flip[kSigma] = -1.0;
  }
  if (q[kK] < 0.0) {
    // cos(-k dx + alpha) = cos(k dx - alpha)
    q[kK] = -q[kK];
    q[kAlpha] = -q[kAlpha];
    flip[kK] = -flip[kK];
    flip[kAlpha] = -flip[kAlpha];
  }
  if (q[kV] < 0.0) {
    q[kV] = -q[kV];
    q[kAlpha] += kPi;
    flip[kV] = -flip[kV];
  }

  const double n = static_cast<double>(y.size());
  const double s2 = lm.cost / std::max(n - static_cast<double>(kNumFitParams), 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lm.jtj);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) inv[i] = ev[i] > cutoff ? 1.0 / ev[i] : 0.0;
  Eigen::MatrixXd cov = s2 * eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  cov = flip.asDiagonal() * cov * flip.asDiagonal();

  FitResult out;
  out.params.a0 = q[kA0];
  out.params.mu = q[kMu];
  out.params.sigma = q[kSigma];
  out.params.v = q[kV];
  out.params.k = q[kK];
  out.params.convention = options.convention;
  if (options.convention == PhaseConvention::literal) {
    // alpha_literal = alpha_centred - k mu
    out.params.alpha = wrap_phase(q[kAlpha] - q[kK] * q[kMu]);
    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(kNumFitParams, kNumFitParams);
    t(kAlpha, kMu) = -q[kK];
    t(kAlpha, kK) = -q[kMu];
    cov = t * cov * t.transpose();
  } else {
    out.params.alpha = wrap_phase(q[kAlpha]);
  }

  for (std::size_t i = 0; i < kNumFitParams; ++i) {
    for (std::size_t j = 0; j < kNumFitParams; ++j) {
      out.covariance[i][j] = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    out.param_std[i] = std::sqrt(std::max(out.covariance[i][i], 0.0));
  }
  out.rms_residual = std::sqrt(lm.cost / n);
  out.iterations = lm.iterations;
  out.converged = true;
  out.visibility_out_of_range = out.params.v > 1.0;
  out.phase_identifiable = out.params.v > std::max(options.phase_visibility_threshold, 3.0 * out.param_std[kV]);
  return out;
}

FitResult fit_full_model(const FringeProfile& profile, const FitOptions& options) {
  return fit_full_model(std::span<const double>(profile.intensities), options);
}

TwoBeamFitResult fit_two_beam(std::span<const double> y, const FitOptions& options) {
  FitOptions literal = options;
  literal.convention = PhaseConvention::envelope_centered;
  const FitResult single = fit_full_model(y, literal);
  const auto& s = single.params;

  // Equal-centre split of the single-envelope solution into two field amplitudes.
  const double v = std::min(s.v, 1.0);
  const double root = std::sqrt(s.a0);
  const double a1 = 0.5 * root * (std::sqrt(1.0 + v) + std::sqrt(1.0 - v));
  const double a2 = 0.5 * root * (std::sqrt(1.0 + v) - std::sqrt(1.0 - v));
  Eigen::VectorXd p(8);
  p << a1, a2, s.mu, s.mu, s.sigma, s.sigma, s.k, s.alpha;

  const TwoBeamModel model{y, s.mu};
  const auto lm = detail::levenberg_marquardt(model, p, lm_options(options));
  require_converged(lm, "fit_two_beam");

  TwoBeamFitResult out;
  const auto& q = lm.params;
  out.beams.amp1 = std::abs(q[0]);
  out.beams.amp2 = std::abs(q[1]);
  out.beams.center1 = q[2];
  out.beams.center2 = q[3];
  out.beams.sigma1 = std::abs(q[4]);
  out.beams.sigma2 = std::abs(q[5]);
  out.beams.tilt_k = q[6];
  double phase = q[7] - q[6] * s.mu;
  if ((q[0] < 0.0) != (q[1] < 0.0)) phase += kPi;
  out.beams.rel_phase = wrap_phase(phase);
  const double power = out.beams.amp1 * out.beams.amp1 + out.beams.amp2 * out.beams.amp2;
  out.visibility = power > 0.0 ? 2.0 * out.beams.amp1 * out.beams.amp2 / power : 0.0;
  out.rms_residual = std::sqrt(lm.cost / static_cast<double>(y.size()));
  out.iterations = lm.iterations;
  out.converged = true;
  return out;
}

double fit_visibility(std::span<const double> samples, FitMethod method, const FitOptions& options) {
  switch (method) {
    case FitMethod::envelope:
      return envelope_visibility(samples).visibility;
    case FitMethod::full_model:
      return fit_full_model(samples, options).params.v;
    case FitMethod::two_beam:
      return fit_two_beam(samples, options).visibility;
  }
  throw InvalidArgument("fit_visibility: unknown method");
}

SweepStatistics aggregate_frames(double theta, std::span<const FringeProfile> frames, FitMethod method,
                                 const FitOptions& options) {
  const std::size_t n = frames.size();
  if (n < 2) throw InvalidArgument("aggregate_frames: need at least 2 frames per angle");

  std::vector<double> vis(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> fit_std(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> alpha(n, 0.0);
  std::vector<std::exception_ptr> errors(n);
  parallel_for(n, [&](std::size_t i) {
    try {
      const std::span<const double> y(frames[i].intensities);
      if (method == FitMethod::full_model) {
        const FitResult fit = fit_full_model(y, options);
        vis[i] = fit.params.v;
        fit_std[i] = fit.param_std[kV];
        alpha[i] = fit.params.alpha;
      } else {
        vis[i] = fit_visibility(y, method, options);
      }
    } catch (const Error&) {
      errors[i] = std::current_exception();
    }
  });

  // Reduction in frame order keeps the result independent of scheduling.
  SweepStatistics st;
  st.theta = theta;
  st.method = method;
  double sum = 0.0;
  double sum_std = 0.0;
  double sum_cos = 0.0;
  double sum_sin = 0.0;
  std::exception_ptr first_error;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      ++st.n_failed;
      if (!first_error) first_error = errors[i];
      continue;
    }
    ++st.n_frames;
    sum += vis[i];
    sum_std += fit_std[i];
    sum_cos += std::cos(alpha[i]);
    sum_sin += std::sin(alpha[i]);
  }
  if (2 * st.n_frames < n) std::rethrow_exception(first_error);

  const double count = static_cast<double>(st.n_frames);
  st.visibility_mean = sum / count;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) continue;
    const double d = vis[i] - st.visibility_mean;
    ss += d * d;
  }
  st.visibility_std = st.n_frames > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
  st.out_of_range = st.visibility_mean < 0.0 || st.visibility_mean > 1.0;
  if (method == FitMethod::full_model) {
    st.mean_fit_std = sum_std / count;
    const double resultant = std::min(std::hypot(sum_cos, sum_sin) / count, 1.0);
    st.phase_mean = std::atan2(sum_sin, sum_cos);
    st.phase_std = std::sqrt(-2.0 * std::log(std::max(resultant, 1e-300)));
  }
  return st;
}

std::vector<SweepStatistics> aggregate_sweep(std::span<const SweepPoint> sweep, FitMethod method,
                                             const FitOptions& options) {
  std::vector<SweepStatistics> out;
  out.reserve(sweep.size());
  for (const auto& point : sweep) out.push_back(aggregate_frames(point.theta, point.frames, method, options));
  return out;
}

}  // namespace mzweak::fringe
