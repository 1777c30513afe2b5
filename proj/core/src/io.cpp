#include "mzweak/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "mzweak/errors.hpp"

namespace mzweak::io {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view text, std::string_view source, std::size_t line) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(source) + ":" + std::to_string(line) + ": not a number: '" +
                      std::string(text) + "'");
  }
  return value;
}

jones::Complex complex_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(std::string(what) + ": expected [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string_view convention_name(fringe::PhaseConvention c) {
  return c == fringe::PhaseConvention::literal ? "literal" : "envelope_centered";
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // folds -0 as well
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

json to_json(jones::Complex z) { return json::array({z.real(), z.imag()}); }

json to_json(const jones::JonesMatrix& m) {
  json out = json::array();
  for (const auto& e : m.m) out.push_back(to_json(e));
  return out;
}

json to_json(const jones::JonesVector& v) { return json::array({to_json(v.h), to_json(v.v)}); }

jones::JonesMatrix jones_matrix_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ConfigError("Jones matrix: expected four [re, im] entries");
  jones::JonesMatrix m;
  for (std::size_t i = 0; i < 4; ++i) m.m[i] = complex_from_json(j[i], "Jones matrix entry");
  return m;
}

jones::JonesVector jones_vector_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("Jones vector: expected two [re, im] entries");
  return {complex_from_json(j[0], "Jones vector entry"), complex_from_json(j[1], "Jones vector entry")};
}

json to_json(const fringe::FringeModelParams& p) {
  return {{"a0", p.a0}, {"mu", p.mu}, {"sigma", p.sigma}, {"v", p.v},
          {"k", p.k},   {"alpha", p.alpha}, {"convention", convention_name(p.convention)}};
}

json to_json(const fringe::DetectorConfig& d) {
  return {{"n_pixels", d.n_pixels},
          {"pixel_half_width", d.pixel_half_width},
          {"read_noise_std", d.read_noise_std},
          {"shot_noise", d.shot_noise},
          {"photons_per_unit", d.photons_per_unit},
          {"seed", d.seed}};
}

json to_json(const fringe::FitResult& r) {
  static constexpr const char* names[] = {"a0", "mu", "sigma", "v", "k", "alpha"};
  json stds = json::object();
  json cov = json::array();
  for (std::size_t i = 0; i < fringe::kNumFitParams; ++i) {
    stds[names[i]] = r.param_std[i];
    cov.push_back(json(r.covariance[i]));
  }
  return {{"params", to_json(r.params)},
          {"rms_residual", r.rms_residual},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"param_std", stds},
          {"covariance", cov},
          {"visibility_out_of_range", r.visibility_out_of_range},
          {"phase_identifiable", r.phase_identifiable}};
}

json to_json(const fringe::EnvelopeVisibility& r) {
  auto fit = [](const fringe::EnvelopeFit& f) {
    return json{{"amplitude", f.amplitude},
                {"width_param", f.width_param},
                {"center", f.center},
                {"rms_residual", f.rms_residual},
                {"iterations", f.iterations},
                {"shared_shape", f.shared_shape}};
  };
  auto points = [](const std::vector<fringe::ExtremaPoint>& pts) {
    json out = json::array();
    for (const auto& p : pts) out.push_back(json::array({p.pixel, p.intensity}));
    return out;
  };
  return {{"visibility", r.visibility},
          {"peaks", fit(r.peaks)},
          {"dips", fit(r.dips)},
          {"peak_points", points(r.extrema.peaks)},
          {"dip_points", points(r.extrema.dips)}};
}

json profile_metadata(const fringe::FringeProfile& profile) {
  json meta = {{"detector", to_json(profile.detector)}, {"n_samples", profile.intensities.size()}};
  if (profile.truth) meta["truth"] = to_json(*profile.truth);
  return meta;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw InvalidArgument("CsvTable: row width does not match header");
  rows_.push_back(std::move(cells));
}

void CsvTable::write(std::ostream& os) const {
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ostringstream os;
  write(os);
  write_text(path, os.str());
}

CsvTable profile_table(const fringe::FringeProfile& profile) {
  CsvTable t({"pixel_index", "intensity"});
  for (std::size_t i = 0; i < profile.intensities.size(); ++i) {
    t.add_row({std::to_string(i), format_double(profile.intensities[i])});
  }
  return t;
}

fringe::FringeProfile read_profile_csv(std::istream& is, std::string_view source) {
  fringe::FringeProfile profile;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (row != "pixel_index,intensity") {
        throw ConfigError(std::string(source) + ": expected header 'pixel_index,intensity'");
      }
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": expected two columns");
    }
    const double index = parse_number(row.substr(0, comma), source, line_no);
    if (index != static_cast<double>(profile.intensities.size())) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": pixel indices must be 0, 1, 2, ...");
    }
    const double value = parse_number(row.substr(comma + 1), source, line_no);
    if (!std::isfinite(value)) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": intensity is not finite");
    }
    profile.intensities.push_back(value);
  }
  if (profile.intensities.empty()) throw ConfigError(std::string(source) + ": no samples");
  profile.detector.n_pixels = profile.intensities.size();
  return profile;
}

fringe::FringeProfile read_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return read_profile_csv(in, path.string());
}

CsvTable theory_table(const std::vector<mzi::TheoryRow>& rows) {
  CsvTable t({"theta_deg", "v_with_r", "v_without_r", "z_abs", "weak_value_abs", "overlap"});
  for (const auto& r : rows) {
    t.add_row({format_degrees(r.theta), format_double(r.v_with_r), format_double(r.v_without_r),
               format_double(r.z_abs),
               format_double(r.weak_value_abs.value_or(std::numeric_limits<double>::quiet_NaN())),
               format_double(r.overlap)});
  }
  return t;
}

std::string_view to_string(fringe::FitMethod method) {
  switch (method) {
    case fringe::FitMethod::envelope:
      return "envelope";
    case fringe::FitMethod::full_model:
      return "full_model";
    case fringe::FitMethod::two_beam:
      return "two_beam";
  }
  return "unknown";
}

CsvTable sweep_table(const std::vector<fringe::SweepStatistics>& rows) {
  CsvTable t({"theta_deg", "v_mean", "v_std", "n_frames", "method"});
  for (const auto& r : rows) {
    t.add_row({format_degrees(r.theta), format_double(r.visibility_mean),
               format_double(r.visibility_std), std::to_string(r.n_frames), std::string(to_string(r.method))});
  }
  return t;
}

CsvTable weak_sweep_table(const std::vector<weakmeas::WeakSweepRow>& rows, double a_over_sigma) {
  CsvTable t({"theta_deg", "centroid_over_a", "weak_value_re_inferred", "weak_value_re_exact_eq2", "a_over_sigma"});
  for (const auto& r : rows) {
    t.add_row({format_degrees(r.theta), format_double(r.centroid_over_a),
               format_double(r.weak_value_h_inferred),
               format_double(r.weak_value_h_exact.value_or(std::numeric_limits<double>::quiet_NaN())),
               format_double(a_over_sigma)});
  }
  return t;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed: " + path.string());
}

double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

std::string format_degrees(double rad) {
  // Strip the rounding noise of the degree -> radian -> degree trip.
  const double deg = rad_to_deg(rad);
  const double snapped = std::round(deg * 1e9) / 1e9;
  return format_double(std::abs(snapped - deg) < 1e-9 ? snapped : deg);
}
double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace mzweak::io
