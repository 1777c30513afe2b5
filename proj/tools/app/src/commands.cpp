#include "mzweak/app/commands.hpp"

#include <charconv>
#include <limits>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mzweak/app/svg.hpp"
#include "mzweak/errors.hpp"
#include "mzweak/io.hpp"
#include "mzweak/mzi.hpp"
#include "mzweak/weakmeas.hpp"

#ifndef MZWEAK_VERSION
#define MZWEAK_VERSION "0.0.0"
#endif

namespace mzweak::app {

namespace {

using nlohmann::json;
using io::format_double;
using jones::JonesVector;

constexpr const char* kBlue = "#1f77b4";
constexpr const char* kOrange = "#ff7f0e";
constexpr const char* kGreen = "#2ca02c";
constexpr const char* kRed = "#d62728";
constexpr const char* kPurple = "#9467bd";
constexpr const char* kGrey = "#555555";
const std::vector<std::string> kPalette{kBlue, kOrange, kGreen, kRed, kPurple, kGrey};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json cell_to_json(const std::string& cell) {
  if (cell == "nan") return nullptr;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec == std::errc{} && ptr == cell.data() + cell.size() && std::isfinite(v)) return v;
  if (cell == "true") return true;
  if (cell == "false") return false;
  return cell;
}

json table_to_json(const io::CsvTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows()) {
    json obj = json::object();
    for (std::size_t i = 0; i < r.size(); ++i) obj[t.header()[i]] = cell_to_json(r[i]);
    rows.push_back(std::move(obj));
  }
  return rows;
}

/// Collects every file a run writes, for the manifest.
class Outputs {
 public:
  Outputs(const ExperimentConfig& cfg) : cfg_(cfg), dir_(cfg.paths.output) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  void text(const std::string& name, const std::string& content) {
    io::write_text(dir_ / name, content);
    names_.push_back(name);
  }

  /// Writes stem.csv or stem.json according to the configured format.
  void table(const io::CsvTable& t, const std::string& stem) {
    if (cfg_.format == OutputFormat::csv) {
      std::ostringstream os;
      t.write(os);
      text(stem + ".csv", os.str());
    } else {
      text(stem + ".json", table_to_json(t).dump(2) + "\n");
    }
  }

  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

  void svg(const std::string& name, const Plot& plot) {
    if (!cfg_.svg) return;
    text(name, render_svg(plot, cfg_.timestamps ? std::optional<std::string>(utc_timestamp()) : std::nullopt));
  }

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  const ExperimentConfig& cfg_;
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

fringe::FrameOptions frame_options(const ExperimentConfig& c) {
  fringe::FrameOptions o;
  o.phase = c.stabilized ? fringe::FramePhase::stabilized : c.frames.phase_mode;
  o.drift_step = c.frames.drift_step_rad;
  o.drift_bound = c.frames.drift_bound_rad;
  return o;
}

fringe::FitOptions fit_options(const ExperimentConfig& c) {
  fringe::FitOptions o;
  o.max_iterations = c.fit.max_iterations;
  o.convention = c.fit.convention;
  return o;
}

weakmeas::WeakSweepOptions weak_options(const ExperimentConfig& c, double a_over_sigma) {
  weakmeas::WeakSweepOptions o;
  o.a_over_sigma = a_over_sigma;
  o.beam_sigma = c.weakmeas.beam_sigma;
  o.displaced = c.weakmeas.displaced;
  o.map = {c.weakmeas.eigen_range_slope, c.weakmeas.eigen_range_offset};
  o.centroid_noise_std = c.weakmeas.centroid_noise_std;
  o.seed = c.seed;
  return o;
}

std::vector<double> degrees(std::span<const double> radians) {
  std::vector<double> out;
  out.reserve(radians.size());
  for (const double r : radians) out.push_back(io::rad_to_deg(r));
  return out;
}

/// Clip values outside [lo, hi] to NaN so plots skip them.
std::vector<double> clipped(std::vector<double> v, double lo, double hi) {
  for (double& x : v) {
    if (!(x >= lo && x <= hi)) x = kNaN;
  }
  return v;
}

Series line(std::string label, std::vector<double> x, std::vector<double> y, const std::string& color,
            bool dashed = false) {
  Series s;
  s.label = std::move(label);
  s.x = std::move(x);
  s.y = std::move(y);
  s.color = color;
  s.dashed = dashed;
  return s;
}

Series markers(std::string label, std::vector<double> x, std::vector<double> y, const std::string& color,
               std::vector<double> err = {}) {
  Series s = line(std::move(label), std::move(x), std::move(y), color);
  s.style = SeriesStyle::markers;
  s.y_err = std::move(err);
  return s;
}

io::CsvTable mzi_inferred_table(const std::vector<MziSweepRow>& rows) {
  io::CsvTable t({"theta_deg", "v_with_r", "v_without_r", "z_abs", "weak_value_abs", "overlap"});
  for (const auto& r : rows) {
    t.add_row({io::format_degrees(r.theta), format_double(r.with_r ? r.with_r->visibility_mean : kNaN),
               format_double(r.without_r ? r.without_r->visibility_mean : kNaN), format_double(r.z_abs.value_or(kNaN)),
               format_double(r.weak_value_abs.value_or(kNaN)), format_double(r.overlap)});
  }
  return t;
}

/// One warning line per arm that could not be reduced.
void log_failures(const std::vector<MziSweepRow>& rows, std::ostream& log) {
  for (const auto& r : rows) {
    for (const auto& f : r.failures) log << "warning: theta " << io::format_degrees(r.theta) << " deg, " << f << "\n";
  }
}

std::vector<fringe::SweepStatistics> arm_stats(const std::vector<MziSweepRow>& rows, bool with_r) {
  std::vector<fringe::SweepStatistics> out;
  for (const auto& r : rows) {
    const auto& s = with_r ? r.with_r : r.without_r;
    if (s) out.push_back(*s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Modes

void cmd_decompose(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
  const auto& d = cfg.decompose;
  const auto chain = jones::weak_value_chain(d.op, d.psi);
  const jones::Complex direct = jones::expectation(d.op, d.psi);

  json j = {{"operator", io::to_json(d.op)},
            {"psi", io::to_json(d.psi)},
            {"u", io::to_json(chain.polar.u)},
            {"r", io::to_json(chain.polar.r)},
            {"polar_residual", chain.polar.residual},
            {"phi", io::to_json(chain.post_selection)},
            {"overlap", io::to_json(chain.overlap)},
            {"weak_value", io::to_json(chain.weak_value)},
            {"z", io::to_json(chain.expectation)},
            {"direct_expectation", io::to_json(direct)},
            {"chain_error", std::abs(chain.expectation - direct)}};
  out.json_file("decompose.json", j);

  if (cfg.format == OutputFormat::csv) {
    io::CsvTable t({"quantity", "re", "im"});
    auto add = [&](const std::string& name, jones::Complex z) {
      t.add_row({name, format_double(z.real()), format_double(z.imag())});
    };
    static constexpr const char* idx[] = {"00", "01", "10", "11"};
    for (std::size_t i = 0; i < 4; ++i) add(std::string("u") + idx[i], chain.polar.u.m[i]);
    for (std::size_t i = 0; i < 4; ++i) add(std::string("r") + idx[i], chain.polar.r.m[i]);
    add("phi_h", chain.post_selection.h);
    add("phi_v", chain.post_selection.v);
    add("overlap", chain.overlap);
    add("weak_value", chain.weak_value);
    add("z", chain.expectation);
    add("direct_expectation", direct);
    std::ostringstream os;
    t.write(os);
    out.text("decompose.csv", os.str());
  }

  auto c = [](jones::Complex z) { return format_double(z.real()) + (z.imag() < 0 ? " - " : " + ") +
                                         format_double(std::abs(z.imag())) + "i"; };
  auto m = [&](const jones::JonesMatrix& a) {
    return "[[" + c(a.m[0]) + ", " + c(a.m[1]) + "], [" + c(a.m[2]) + ", " + c(a.m[3]) + "]]";
  };
  log << "U        = " << m(chain.polar.u) << "\n"
      << "R        = " << m(chain.polar.r) << "\n"
      << "phi      = U^H psi = (" << c(chain.post_selection.h) << ", " << c(chain.post_selection.v) << ")\n"
      << "<phi|psi> = " << c(chain.overlap) << "\n"
      << "R_w      = " << c(chain.weak_value) << "\n"
      << "z        = R_w <phi|psi> = " << c(chain.expectation) << "\n"
      << "<psi|A|psi> = " << c(direct) << "\n";
}

void cmd_mzi_theory(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
  const auto thetas = cfg.theta.radians();
  const auto rows = mzi::theory_sweep(thetas, cfg.imperfection.model());
  out.table(io::theory_table(rows), "mzi_theory");

  std::vector<double> vr, vn, wv;
  for (const auto& r : rows) {
    vr.push_back(r.v_with_r);
    vn.push_back(r.v_without_r);
    wv.push_back(r.weak_value_abs.value_or(kNaN));
  }
  const auto deg = degrees(thetas);
  Plot p{"Interferometer visibility (closed form)", "HWP angle (deg)", "visibility", {}, 0.0, 1.05};
  p.series.push_back(line("V with polarizer", deg, vr, kBlue));
  p.series.push_back(line("V without polarizer", deg, vn, kOrange));
  out.svg("mzi_theory_visibility.svg", p);
  Plot q{"Inferred |R_w| (closed form)", "HWP angle (deg)", "|R_w|", {}, 0.0, 3.0};
  q.series.push_back(line("|R_w|", deg, clipped(wv, 0.0, 3.0), kGreen));
  out.svg("mzi_theory_weak_value.svg", q);
  log << "mzi-theory: " << rows.size() << " angles\n";
}

std::vector<fringe::FringeProfile> synth_frames(const ExperimentConfig& cfg) {
  fringe::DetectorConfig det = cfg.detector;
  det.seed = cfg.seed;
  const auto opts = frame_options(cfg);
  const auto& s = cfg.synth;
  switch (s.source) {
    case SynthSource::mzi: {
      mzi::MziConfig m = mzi::MziConfig::polarizer_hwp_setup(io::deg_to_rad(s.theta_deg), s.with_r);
      m.imperfection = cfg.imperfection.model();
      return fringe::generate_frames(m, cfg.envelope, det, s.n_frames, opts);
    }
    case SynthSource::model: {
      fringe::FringeModelParams p = cfg.envelope;
      p.v = s.v;
      return fringe::generate_frames(p, det, s.n_frames, opts);
    }
    case SynthSource::two_beam: {
      std::vector<fringe::FringeProfile> frames;
      const double scale = s.two_beam.amp1 * s.two_beam.amp1 + s.two_beam.amp2 * s.two_beam.amp2;
      for (std::size_t i = 0; i < s.n_frames; ++i) {
        auto f = det.pixel_half_width > 0.0 ? fringe::pixel_average(s.two_beam, det)
                                            : fringe::two_beam_profile(s.two_beam, det);
        fringe::apply_detector_noise(f.intensities, scale, det, fringe::derive_seed(det.seed, 2 * i + 1));
        frames.push_back(std::move(f));
      }
      return frames;
    }
  }
  throw ConfigError("synth: unknown source");
}

void cmd_synth(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
  const auto frames = synth_frames(cfg);
  json meta = json::array();
  for (const auto& f : frames) meta.push_back(io::profile_metadata(f));

  char name[64];
  if (cfg.format == OutputFormat::json) {
    json j = json::array();
    for (std::size_t i = 0; i < frames.size(); ++i) {
      j.push_back({{"metadata", meta[i]}, {"intensities", frames[i].intensities}});
    }
    out.json_file("profiles.json", j);
  } else if (cfg.synth.layout == SynthLayout::wide) {
    std::vector<std::string> header{"pixel_index"};
    for (std::size_t i = 0; i < frames.size(); ++i) {
      std::snprintf(name, sizeof name, "frame_%04zu", i);
      header.emplace_back(name);
    }
    io::CsvTable t(header);
    for (std::size_t px = 0; px < frames.front().intensities.size(); ++px) {
      std::vector<std::string> row{std::to_string(px)};
      for (const auto& f : frames) row.push_back(format_double(f.intensities[px]));
      t.add_row(std::move(row));
    }
    std::ostringstream os;
    t.write(os);
    out.text("profiles.csv", os.str());
    out.json_file("profiles_meta.json", meta);
  } else {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      std::snprintf(name, sizeof name, "profile_%04zu.csv", i);
      std::ostringstream os;
      io::profile_table(frames[i]).write(os);
      out.text(name, os.str());
    }
    out.json_file("profiles_meta.json", meta);
  }

  std::vector<double> x(frames.front().intensities.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  Plot p{"Synthetic fringe profile (frame 0)", "pixel", "intensity", {}, std::nullopt, std::nullopt};
  p.series.push_back(line("frame 0", x, frames.front().intensities, kBlue));
  out.svg("synth.svg", p);
  log << "synth: " << frames.size() << " frame(s) of " << x.size() << " pixels\n";
}

void cmd_fit(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
  if (cfg.paths.input.empty()) throw ConfigError("fit: paths.input (or --input) must name a profile CSV");
  const auto profile = io::read_profile_csv(cfg.paths.input);
  const auto& y = profile.intensities;
  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  Plot p{"Fringe fit", "pixel", "intensity", {}, std::nullopt, std::nullopt};
  p.series.push_back(markers("data", x, y, kGrey));

  switch (cfg.fit.method) {
    case fringe::FitMethod::full_model: {
      const auto fit = fringe::fit_full_model(profile, fit_options(cfg));
      out.json_file("fit.json", io::to_json(fit));
      if (cfg.format == OutputFormat::csv) {
        static constexpr const char* names[] = {"a0", "mu", "sigma", "v", "k", "alpha"};
        const double values[] = {fit.params.a0, fit.params.mu, fit.params.sigma,
                                 fit.params.v,  fit.params.k,  fit.params.alpha};
        io::CsvTable t({"parameter", "value", "std"});
        for (std::size_t i = 0; i < fringe::kNumFitParams; ++i) {
          t.add_row({names[i], format_double(values[i]), format_double(fit.param_std[i])});
        }
        std::ostringstream os;
        t.write(os);
        out.text("fit.csv", os.str());
      }
      std::vector<double> model(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) model[i] = fit.params(x[i]);
      p.series.push_back(line("model", x, model, kRed));
      log << "fit: V = " << format_double(fit.params.v) << " +- " << format_double(fit.param_std[fringe::kV])
          << ", k = " << format_double(fit.params.k) << ", iterations = " << fit.iterations
          << (fit.visibility_out_of_range ? " (V > 1)" : "") << "\n";
      break;
    }
    case fringe::FitMethod::envelope: {
      const auto env = fringe::envelope_visibility(profile);
      out.json_file("envelope.json", io::to_json(env));
      io::CsvTable t({"kind", "pixel", "intensity"});
      for (const auto& pt : env.extrema.peaks) t.add_row({"peak", format_double(pt.pixel), format_double(pt.intensity)});
      for (const auto& pt : env.extrema.dips) t.add_row({"dip", format_double(pt.pixel), format_double(pt.intensity)});
      out.table(t, "extrema");
      std::vector<double> ep(x.size()), ed(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        ep[i] = env.peaks.amplitude * std::exp(-env.peaks.width_param * std::pow(x[i] - env.peaks.center, 2));
        ed[i] = env.dips.amplitude * std::exp(-env.dips.width_param * std::pow(x[i] - env.dips.center, 2));
      }
      p.series.push_back(line("peak envelope", x, ep, kRed));
      p.series.push_back(line("dip envelope", x, ed, kBlue));
      log << "fit (envelope): V = " << format_double(env.visibility) << "\n";
      break;
    }
    case fringe::FitMethod::two_beam: {
      const auto fit = fringe::fit_two_beam(y, fit_options(cfg));
      const auto& b = fit.beams;
      out.json_file("fit_two_beam.json",
                    {{"visibility", fit.visibility},
                     {"rms_residual", fit.rms_residual},
                     {"iterations", fit.iterations},
                     {"converged", fit.converged},
                     {"beams",
                      {{"amp1", b.amp1}, {"amp2", b.amp2}, {"center1", b.center1}, {"center2", b.center2},
                       {"sigma1", b.sigma1}, {"sigma2", b.sigma2}, {"tilt_k", b.tilt_k},
                       {"rel_phase", b.rel_phase}}}});
      std::vector<double> model(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) model[i] = b.intensity(x[i]);
      p.series.push_back(line("two-beam model", x, model, kRed));
      log << "fit (two-beam): V = " << format_double(fit.visibility) << "\n";
      break;
    }
  }
  out.svg("fit.svg", p);
}

void sweep_plots(const std::vector<MziSweepRow>& rows, const std::vector<mzi::TheoryRow>& theory, Outputs& out,
                 const std::string& prefix, bool visibility, bool weak_value) {
  std::vector<double> deg, vr, vr_e, vn, vn_e, wv, tvr, tvn, twv;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    deg.push_back(io::rad_to_deg(r.theta));
    vr.push_back(r.with_r ? r.with_r->visibility_mean : kNaN);
    vr_e.push_back(r.with_r ? r.with_r->visibility_std : kNaN);
    vn.push_back(r.without_r ? r.without_r->visibility_mean : kNaN);
    vn_e.push_back(r.without_r ? r.without_r->visibility_std : kNaN);
    wv.push_back(r.weak_value_abs.value_or(kNaN));
    tvr.push_back(theory[i].v_with_r);
    tvn.push_back(theory[i].v_without_r);
    twv.push_back(theory[i].weak_value_abs.value_or(kNaN));
  }
  if (visibility) {
    Plot p{"Fitted visibility vs half-wave plate angle", "HWP angle (deg)", "visibility", {}, 0.0, 1.05};
    if (rows.front().with_r) {
      p.series.push_back(markers("V with polarizer (fit)", deg, vr, kBlue, vr_e));
      p.series.push_back(line("V with polarizer (theory)", deg, tvr, kBlue, true));
    }
    if (rows.front().without_r) {
      p.series.push_back(markers("V without polarizer (fit)", deg, vn, kOrange, vn_e));
      p.series.push_back(line("V without polarizer (theory)", deg, tvn, kOrange, true));
    }
    out.svg(prefix + "_visibility.svg", p);
  }
  if (weak_value) {
    Plot q{"Weak value of R inferred from the interferometer", "HWP angle (deg)", "|R_w|", {}, 0.0, 3.0};
    q.series.push_back(markers("|R_w| (fit)", deg, clipped(wv, 0.0, 3.0), kGreen));
    q.series.push_back(line("|R_w| (theory)", deg, clipped(twv, 0.0, 3.0), kGrey, true));
    out.svg(prefix + "_weak_value.svg", q);
  }
}

void cmd_sweep(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
  const auto thetas = cfg.theta.radians();
  const auto rows = run_mzi_sweep(cfg, thetas);
  log_failures(rows, log);
  out.table(io::sweep_table(arm_stats(rows, true)), "sweep_with_r");
  out.table(io::sweep_table(arm_stats(rows, false)), "sweep_without_r");
  out.table(mzi_inferred_table(rows), "sweep_inferred");
  if (cfg.stabilized) {
    io::CsvTable t({"theta_deg", "phase_with_r", "phase_with_r_std", "arg_z_theory"});
    const auto imperfection = cfg.imperfection.model();
    for (const auto& r : rows) {
      mzi::MziConfig m = mzi::MziConfig::polarizer_hwp_setup(r.theta, true);
      m.imperfection = imperfection;
      t.add_row({io::format_degrees(r.theta), format_double(r.with_r->phase_mean.value_or(kNaN)),
                 format_double(r.with_r->phase_std.value_or(kNaN)), format_double(std::arg(mzi::arm_overlap(m)))});
    }
    out.table(t, "sweep_phase");
  }
  sweep_plots(rows, mzi::theory_sweep(thetas, cfg.imperfection.model()), out, "sweep", true, true);
  log << "sweep: " << rows.size() << " angles x " << cfg.frames.n_frames << " frames x 2 arms\n";
}

void cmd_weakmeas(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
  const auto thetas = cfg.theta.radians();
  const auto rows = weakmeas::expectation_of_A_via_weakmeas(thetas, weak_options(cfg, cfg.weakmeas.a_over_sigma));
  out.table(io::weak_sweep_table(rows, cfg.weakmeas.a_over_sigma), "weakmeas");
  std::vector<double> inferred, exact;
  for (const auto& r : rows) {
    inferred.push_back(r.weak_value_h_inferred);
    exact.push_back(r.weak_value_h_exact.value_or(kNaN));
  }
  const auto deg = degrees(thetas);
  Plot p{"Weak value of the horizontal projector from the pointer centroid", "HWP angle (deg)", "Re <Pi_H>_w",
         {}, -3.0, 4.0};
  p.series.push_back(markers("inferred (a/sigma = " + format_double(cfg.weakmeas.a_over_sigma) + ")", deg,
                             clipped(inferred, -3.0, 4.0), kBlue));
  p.series.push_back(line("exact weak value", deg, clipped(exact, -3.0, 4.0), kGrey, true));
  out.svg("weakmeas.svg", p);
  log << "weakmeas: " << rows.size() << " angles at a/sigma = " << format_double(cfg.weakmeas.a_over_sigma) << "\n";
}

// ---------------------------------------------------------------------------
// Figures

void fig4(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
  // Example profile at 45 degrees with the polarizer, analysed by the peak/dip method.
  fringe::DetectorConfig det = cfg.detector;
  det.seed = cfg.seed;
  mzi::MziConfig m = mzi::MziConfig::polarizer_hwp_setup(std::numbers::pi / 4.0, true);
  m.imperfection = cfg.imperfection.model();
  const auto frame = fringe::generate_frames(m, cfg.envelope, det, 1, frame_options(cfg)).front();
  const auto env = fringe::envelope_visibility(frame);
  {
    std::ostringstream os;
    io::profile_table(frame).write(os);
    out.text("fig4_profile.csv", os.str());
  }
  io::CsvTable ext({"kind", "pixel", "intensity"});
  for (const auto& pt : env.extrema.peaks) ext.add_row({"peak", format_double(pt.pixel), format_double(pt.intensity)});
  for (const auto& pt : env.extrema.dips) ext.add_row({"dip", format_double(pt.pixel), format_double(pt.intensity)});
  out.table(ext, "fig4_extrema");
  out.json_file("fig4_envelope.json", io::to_json(env));

  const auto& y = frame.intensities;
  std::vector<double> x(y.size()), ep(y.size()), ed(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(i);
    ep[i] = env.peaks.amplitude * std::exp(-env.peaks.width_param * std::pow(x[i] - env.peaks.center, 2));
    ed[i] = env.dips.amplitude * std::exp(-env.dips.width_param * std::pow(x[i] - env.dips.center, 2));
  }
  std::vector<double> px, py, dx, dy;
  for (const auto& pt : env.extrema.peaks) {
    px.push_back(pt.pixel);
    py.push_back(pt.intensity);
  }
  for (const auto& pt : env.extrema.dips) {
    dx.push_back(pt.pixel);
    dy.push_back(pt.intensity);
  }
  Plot p{"Beam profile at 45 deg: peaks, dips and Gaussian envelopes", "pixel", "intensity", {}, std::nullopt,
         std::nullopt};
  p.series.push_back(line("profile", x, y, kGrey));
  p.series.push_back(markers("peaks", px, py, kBlue));
  p.series.push_back(markers("dips", dx, dy, kRed));
  p.series.push_back(line("peak envelope", x, ep, kBlue, true));
  p.series.push_back(line("dip envelope", x, ed, kRed, true));
  out.svg("fig4_profile.svg", p);

  // <A> = |z| = V (1 + <R^2>) / 2 over the angle sweep.
  const auto thetas = cfg.theta.radians();
  const auto rows = run_mzi_sweep(cfg, thetas, {true, false});
  log_failures(rows, log);
  const auto theory = mzi::theory_sweep(thetas, cfg.imperfection.model());
  const double r_sq = mzi::measure_r_squared(JonesVector::diagonal(), jones::projector_h());
  io::CsvTable t({"theta_deg", "z_abs", "z_abs_std", "z_abs_theory"});
  std::vector<double> z, z_err, zt;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = *rows[i].with_r;
    z.push_back(rows[i].z_abs.value_or(kNaN));
    z_err.push_back(s.visibility_std * (1.0 + r_sq) / 2.0);
    zt.push_back(theory[i].z_abs);
    t.add_row({io::format_degrees(rows[i].theta), format_double(z.back()), format_double(z_err.back()),
               format_double(zt.back())});
  }
  out.table(t, "fig4_expectation");
  const auto deg = degrees(thetas);
  Plot q{"|<A>| from the interferometer", "HWP angle (deg)", "|<A>|", {}, 0.0, 0.8};
  q.series.push_back(markers("fit", deg, z, kBlue, z_err));
  q.series.push_back(line("theory", deg, zt, kGrey, true));
  out.svg("fig4_expectation.svg", q);
  log << "fig4: envelope V at 45 deg = " << format_double(env.visibility) << "\n";
}

void fig5_fig6(const ExperimentConfig& cfg, Outputs& out, std::ostream& log, bool fig6) {
  const auto thetas = cfg.theta.radians();
  const auto rows = run_mzi_sweep(cfg, thetas, {fig6, true});
  log_failures(rows, log);
  const auto theory = mzi::theory_sweep(thetas, cfg.imperfection.model());
  const std::string prefix = fig6 ? "fig6" : "fig5";
  if (fig6) {
    out.table(io::sweep_table(arm_stats(rows, true)), "fig6_sweep_with_r");
    out.table(io::sweep_table(arm_stats(rows, false)), "fig6_sweep_without_r");
    out.table(mzi_inferred_table(rows), "fig6_inferred");
  } else {
    out.table(io::sweep_table(arm_stats(rows, false)), "fig5_sweep");
  }
  out.table(io::theory_table(theory), prefix + "_theory");
  sweep_plots(rows, theory, out, prefix, !fig6, fig6);
  log << prefix << ": " << rows.size() << " angles x " << cfg.frames.n_frames << " frames\n";
}

void fig8(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
  const auto thetas = cfg.theta.radians();
  const auto deg = degrees(thetas);
  io::CsvTable t({"theta_deg", "centroid_over_a", "weak_value_re_inferred", "weak_value_re_exact_eq2", "a_over_sigma"});
  Plot p{"Weak value of the horizontal projector: pointer-centroid route", "HWP angle (deg)", "Re <Pi_H>_w", {},
         -3.0, 4.0};
  std::vector<double> exact;
  const double ratios[] = {cfg.weakmeas.a_over_sigma, cfg.weakmeas.realistic_a_over_sigma};
  for (std::size_t k = 0; k < 2; ++k) {
    const auto rows = weakmeas::expectation_of_A_via_weakmeas(thetas, weak_options(cfg, ratios[k]));
    const auto part = io::weak_sweep_table(rows, ratios[k]);
    for (const auto& r : part.rows()) t.add_row(r);
    std::vector<double> inferred;
    exact.clear();
    for (const auto& r : rows) {
      inferred.push_back(r.weak_value_h_inferred);
      exact.push_back(r.weak_value_h_exact.value_or(kNaN));
    }
    p.series.push_back(line("a/sigma = " + format_double(ratios[k]), deg, clipped(inferred, -3.0, 4.0),
                            k == 0 ? kBlue : kOrange, k == 1));
  }
  p.series.push_back(markers("exact weak value", deg, clipped(exact, -3.0, 4.0), kGrey));
  out.table(t, "fig8");
  out.svg("fig8.svg", p);
  log << "fig8: " << thetas.size() << " angles at two displacement ratios\n";
}

void fig9(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
  const double ratio = cfg.weakmeas.realistic_a_over_sigma;
  const double sigma = cfg.weakmeas.beam_sigma;
  io::CsvTable t({"theta_deg", "x_over_sigma", "density", "a_over_sigma"});
  Plot p{"Post-selected pointer distributions", "x / sigma", "normalized density (1/sigma)", {}, std::nullopt,
         std::nullopt};
  const JonesVector psi = JonesVector::diagonal();
  for (std::size_t k = 0; k < cfg.figure.fig9_theta_deg.size(); ++k) {
    const double theta_deg = cfg.figure.fig9_theta_deg[k];
    const JonesVector phi = jones::hwp(io::deg_to_rad(theta_deg)).adjoint() * psi;
    const auto wm = weakmeas::WeakMeasConfig::from_ratio(psi, phi, ratio, sigma, cfg.weakmeas.displaced);
    const auto st = weakmeas::pointer_after_postselection(wm);
    std::vector<double> xs, ds;
    for (int i = 0; i <= 400; ++i) {
      const double u = -5.0 + 10.0 * i / 400.0 + 0.5 * ratio;
      const double d = st.density(u * sigma) / st.norm * sigma;
      xs.push_back(u);
      ds.push_back(d);
      t.add_row({format_double(theta_deg), format_double(u), format_double(d), format_double(ratio)});
    }
    p.series.push_back(line("theta = " + format_double(theta_deg) + " deg", xs, ds,
                            kPalette[k % kPalette.size()]));
  }
  out.table(t, "fig9");
  out.svg("fig9.svg", p);
  log << "fig9: pointer densities at " << cfg.figure.fig9_theta_deg.size() << " angles, a/sigma = "
      << format_double(ratio) << "\n";
}

void fig10(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
  const auto thetas = cfg.theta.radians();
  const auto deg = degrees(thetas);
  const auto theory = mzi::theory_sweep(thetas, std::nullopt);
  io::CsvTable t({"theta_deg", "a_over_sigma", "expectation_weakmeas", "expectation_exact", "z_abs_mzi",
                  "amplification_region"});
  Plot p{"|<A>|: weak measurement vs interferometer", "HWP angle (deg)", "|<A>|", {}, 0.0, 0.8};
  const double ratios[] = {cfg.weakmeas.a_over_sigma, cfg.weakmeas.realistic_a_over_sigma};
  std::vector<double> exact;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto rows = weakmeas::expectation_of_A_via_weakmeas(thetas, weak_options(cfg, ratios[k]));
    std::vector<double> inferred;
    exact.clear();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      inferred.push_back(std::abs(r.expectation_inferred));
      exact.push_back(std::abs(r.expectation_exact));
      t.add_row({io::format_degrees(r.theta), format_double(ratios[k]), format_double(r.expectation_inferred),
                 format_double(r.expectation_exact), format_double(theory[i].z_abs),
                 r.amplification_region ? "true" : "false"});
    }
    p.series.push_back(markers("weak measurement, a/sigma = " + format_double(ratios[k]), deg, inferred,
                               k == 0 ? kBlue : kOrange));
  }
  p.series.push_back(line("|<psi|A|psi>| (exact)", deg, exact, kGrey, true));
  out.table(t, "fig10");
  out.svg("fig10.svg", p);
  log << "fig10: " << thetas.size() << " angles\n";
}

void cmd_reproduce(const ExperimentConfig& cfg, Outputs& out, std::ostream& log) {
  switch (cfg.figure.id) {
    case Figure::fig4: return fig4(cfg, out, log);
    case Figure::fig5: return fig5_fig6(cfg, out, log, false);
    case Figure::fig6: return fig5_fig6(cfg, out, log, true);
    case Figure::fig8: return fig8(cfg, out, log);
    case Figure::fig9: return fig9(cfg, out, log);
    case Figure::fig10: return fig10(cfg, out, log);
  }
}

}  // namespace

std::vector<MziSweepRow> run_mzi_sweep(const ExperimentConfig& cfg, std::span<const double> thetas,
                                       SweepSelection selection) {
  const auto imperfection = cfg.imperfection.model();
  const auto opts = frame_options(cfg);
  const auto fit_opts = fit_options(cfg);
  const JonesVector psi = JonesVector::diagonal();
  const double r_sq = mzi::measure_r_squared(psi, jones::projector_h());

  std::vector<MziSweepRow> rows(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    MziSweepRow& row = rows[i];
    row.theta = thetas[i];
    row.overlap = jones::expectation(jones::hwp(thetas[i]), psi).real();
    for (const bool with_r : {true, false}) {
      if (with_r ? !selection.with_r : !selection.without_r) continue;
      mzi::MziConfig m = mzi::MziConfig::polarizer_hwp_setup(thetas[i], with_r);
      m.imperfection = imperfection;
      fringe::DetectorConfig det = cfg.detector;
      det.seed = fringe::derive_seed(cfg.seed, 2 * i + (with_r ? 0 : 1));
      const auto frames = fringe::generate_frames(m, cfg.envelope, det, cfg.frames.n_frames, opts);
      fringe::SweepStatistics stats;
      try {
        stats = fringe::aggregate_frames(thetas[i], frames, cfg.fit.method, fit_opts);
      } catch (const Error& e) {
        if (e.family() == ErrorFamily::config) throw;
        stats = fringe::SweepStatistics{};
        stats.theta = thetas[i];
        stats.method = cfg.fit.method;
        stats.visibility_mean = std::numeric_limits<double>::quiet_NaN();
        stats.visibility_std = std::numeric_limits<double>::quiet_NaN();
        stats.n_failed = frames.size();
        row.failures.push_back(std::string(with_r ? "with_r" : "without_r") + ": " + e.what());
      }
      (with_r ? row.with_r : row.without_r) = stats;
    }
    if (row.with_r && row.with_r->visibility_mean >= 0.0) row.z_abs = mzi::infer_z(row.with_r->visibility_mean, r_sq);
    if (row.with_r && row.with_r->n_frames > 0 && row.without_r && row.without_r->visibility_mean > 0.0) {
      const auto wv = mzi::infer_weak_value(row.with_r->visibility_mean, row.without_r->visibility_mean, r_sq);
      row.weak_value_abs = wv.magnitude;
      // A fitted V cannot drop below its own noise floor, so that floor also marks the region.
      const double floor = 3.0 * row.without_r->mean_fit_std.value_or(0.0);
      row.amplification_region = wv.amplification_region || row.without_r->visibility_mean < floor;
    } else if (row.without_r && !(row.without_r->visibility_mean > 0.0)) {
      // No measurable fringe without R: the overlap vanishes.
      row.amplification_region = true;
    }
  }
  return rows;
}

RunResult run(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const std::string started = utc_timestamp();
  Outputs out(cfg);
  switch (cfg.mode) {
    case Mode::decompose: cmd_decompose(cfg, out, log); break;
    case Mode::mzi_theory: cmd_mzi_theory(cfg, out, log); break;
    case Mode::synth: cmd_synth(cfg, out, log); break;
    case Mode::fit: cmd_fit(cfg, out, log); break;
    case Mode::sweep: cmd_sweep(cfg, out, log); break;
    case Mode::weakmeas: cmd_weakmeas(cfg, out, log); break;
    case Mode::reproduce: cmd_reproduce(cfg, out, log); break;
  }

  const json resolved = to_json(cfg);
  json manifest = {{"tool", "mzweak"},
                   {"version", MZWEAK_VERSION},
                   {"mode", to_string(cfg.mode)},
                   {"seed", cfg.seed},
                   {"config_hash", "fnv1a64:" + fnv1a_hex(resolved.dump())},
                   {"config", resolved},
                   {"outputs", out.names()},
                   {"started_at", cfg.timestamps ? json(started) : json(nullptr)},
                   {"finished_at", cfg.timestamps ? json(utc_timestamp()) : json(nullptr)}};
  io::write_text(out.dir() / "manifest.json", manifest.dump(2) + "\n");
  return {out.dir(), out.names()};
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace mzweak::app
