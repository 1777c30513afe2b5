#include "mzweak/app/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <utility>

#include "mzweak/errors.hpp"
#include "mzweak/io.hpp"

namespace mzweak::app {

namespace {

using nlohmann::json;

/// One JSON object level. Tracks which keys were read so leftovers can be
/// reported as unknown.
class Section {
 public:
  Section(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_null() && !j_->is_object()) throw ConfigError(path_ + ": expected an object");
    if (j_ && j_->is_null()) j_ = nullptr;
  }

  bool has(const char* key) const { return j_ && j_->contains(key) && !(*j_)[key].is_null(); }

  const json* raw(const char* key) {
    seen_.insert(key);
    return has(key) ? &(*j_)[key] : nullptr;
  }

  Section child(const char* key) {
    seen_.insert(key);
    return Section(j_ && j_->contains(key) ? &(*j_)[key] : nullptr, path_ + "." + key);
  }

  double number(const char* key, double def) {
    const json* v = raw(key);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError(where(key) + ": expected a number");
    return v->get<double>();
  }

  std::optional<double> optional_number(const char* key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw ConfigError(where(key) + ": expected a number or null");
    return v->get<double>();
  }

  std::uint64_t unsigned_integer(const char* key, std::uint64_t def) {
    const json* v = raw(key);
    if (!v) return def;
    const bool ok = v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0);
    if (!ok) throw ConfigError(where(key) + ": expected a non-negative integer");
    return v->get<std::uint64_t>();
  }

  bool boolean(const char* key, bool def) {
    const json* v = raw(key);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v->get<bool>();
  }

  std::string string(const char* key, const std::string& def) {
    const json* v = raw(key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError(where(key) + ": expected a string");
    return v->get<std::string>();
  }

  template <class E>
  E choice(const char* key, E def, const std::map<std::string, E>& options) {
    const json* v = raw(key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError(where(key) + ": expected a string");
    const auto it = options.find(v->get<std::string>());
    if (it == options.end()) {
      std::string allowed;
      for (const auto& [name, _] : options) allowed += (allowed.empty() ? "" : ", ") + name;
      throw ConfigError(where(key) + ": '" + v->get<std::string>() + "' is not one of {" + allowed + "}");
    }
    return it->second;
  }

  /// Throws on keys that were never read.
  void finish() const {
    if (!j_) return;
    for (const auto& [key, _] : j_->items()) {
      if (!seen_.count(key)) throw ConfigError(where(key.c_str()) + ": unknown key");
    }
  }

  std::string where(const char* key) const { return path_ + "." + key; }

 private:
  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class E>
std::string name_of(E value, const std::map<std::string, E>& options) {
  for (const auto& [name, v] : options) {
    if (v == value) return name;
  }
  return "unknown";
}

const std::map<std::string, Mode> kModes{{"decompose", Mode::decompose}, {"mzi-theory", Mode::mzi_theory},
                                         {"synth", Mode::synth},         {"fit", Mode::fit},
                                         {"sweep", Mode::sweep},         {"weakmeas", Mode::weakmeas},
                                         {"reproduce", Mode::reproduce}};
const std::map<std::string, Figure> kFigures{{"fig4", Figure::fig4}, {"fig5", Figure::fig5},
                                             {"fig6", Figure::fig6}, {"fig8", Figure::fig8},
                                             {"fig9", Figure::fig9}, {"fig10", Figure::fig10}};
const std::map<std::string, OutputFormat> kFormats{{"csv", OutputFormat::csv}, {"json", OutputFormat::json}};
const std::map<std::string, fringe::FramePhase> kPhaseModes{{"unstabilized", fringe::FramePhase::unstabilized},
                                                            {"stabilized", fringe::FramePhase::stabilized},
                                                            {"drift", fringe::FramePhase::drift}};
const std::map<std::string, fringe::FitMethod> kMethods{{"full_model", fringe::FitMethod::full_model},
                                                        {"envelope", fringe::FitMethod::envelope},
                                                        {"two_beam", fringe::FitMethod::two_beam}};
const std::map<std::string, fringe::PhaseConvention> kConventions{
    {"envelope_centered", fringe::PhaseConvention::envelope_centered},
    {"literal", fringe::PhaseConvention::literal}};
const std::map<std::string, weakmeas::Component> kComponents{{"H", weakmeas::Component::H},
                                                             {"V", weakmeas::Component::V}};
const std::map<std::string, SynthSource> kSources{
    {"model", SynthSource::model}, {"mzi", SynthSource::mzi}, {"two_beam", SynthSource::two_beam}};
const std::map<std::string, SynthLayout> kLayouts{{"file_per_frame", SynthLayout::file_per_frame},
                                                  {"wide", SynthLayout::wide}};

std::optional<jones::JonesMatrix> operator_preset(const std::string& name) {
  static const std::map<std::string, jones::JonesMatrix> presets{
      {"lowering", jones::lowering()},       {"identity", jones::JonesMatrix::identity()},
      {"pauli_x", jones::pauli_x()},         {"pauli_y", jones::pauli_y()},
      {"pauli_z", jones::pauli_z()},         {"projector_h", jones::projector_h()},
      {"projector_v", jones::projector_v()}};
  const auto it = presets.find(name);
  if (it == presets.end()) return std::nullopt;
  return it->second;
}

std::optional<jones::JonesVector> state_preset(const std::string& name) {
  using jones::JonesVector;
  static const std::map<std::string, JonesVector> presets{
      {"plus", JonesVector::diagonal()},        {"minus", JonesVector::antidiagonal()},
      {"h", JonesVector::horizontal()},         {"v", JonesVector::vertical()},
      {"r", JonesVector::right_circular()},     {"l", JonesVector::left_circular()}};
  const auto it = presets.find(name);
  if (it == presets.end()) return std::nullopt;
  return it->second;
}

void parse_decompose(Section s, DecomposeConfig& d) {
  if (const json* op = s.raw("operator")) {
    if (op->is_string()) {
      const auto preset = operator_preset(op->get<std::string>());
      if (!preset) throw ConfigError(s.where("operator") + ": unknown preset '" + op->get<std::string>() + "'");
      d.op = *preset;
      d.op_name = op->get<std::string>();
    } else {
      d.op = io::jones_matrix_from_json(*op);
      d.op_name.clear();
    }
  }
  if (const json* psi = s.raw("psi")) {
    if (psi->is_string()) {
      const auto preset = state_preset(psi->get<std::string>());
      if (!preset) throw ConfigError(s.where("psi") + ": unknown preset '" + psi->get<std::string>() + "'");
      d.psi = *preset;
      d.psi_name = psi->get<std::string>();
    } else {
      d.psi = io::jones_vector_from_json(*psi);
      d.psi_name.clear();
    }
  }
  s.finish();
}

void parse_envelope(Section s, fringe::FringeModelParams& p) {
  p.a0 = s.number("a0", p.a0);
  p.mu = s.number("mu", p.mu);
  p.sigma = s.number("sigma", p.sigma);
  p.k = s.number("k", p.k);
  p.alpha = s.number("alpha", p.alpha);
  p.convention = s.choice("convention", p.convention, kConventions);
  s.finish();
}

void parse_detector(Section s, fringe::DetectorConfig& d) {
  d.n_pixels = s.unsigned_integer("n_pixels", d.n_pixels);
  d.pixel_half_width = s.number("pixel_half_width", d.pixel_half_width);
  d.read_noise_std = s.number("read_noise_std", d.read_noise_std);
  d.shot_noise = s.boolean("shot_noise", d.shot_noise);
  d.photons_per_unit = s.number("photons_per_unit", d.photons_per_unit);
  s.finish();
}

void parse_two_beam(Section s, fringe::TwoBeamConfig& t) {
  t.amp1 = s.number("amp1", t.amp1);
  t.amp2 = s.number("amp2", t.amp2);
  t.center1 = s.number("center1", t.center1);
  t.center2 = s.number("center2", t.center2);
  t.sigma1 = s.number("sigma1", t.sigma1);
  t.sigma2 = s.number("sigma2", t.sigma2);
  t.tilt_k = s.number("tilt_k", t.tilt_k);
  t.rel_phase = s.number("rel_phase", t.rel_phase);
  s.finish();
}

}  // namespace

std::vector<double> ThetaGrid::radians() const {
  const auto n = static_cast<std::size_t>(std::llround((stop_deg - start_deg) / step_deg)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = io::deg_to_rad(start_deg + static_cast<double>(i) * step_deg);
  return out;
}

std::optional<mzi::ImperfectionModel> ImperfectionConfig::model() const {
  if (retardance_rad == 0.0) return std::nullopt;
  mzi::ImperfectionModel m;
  m.retardance = retardance_rad;
  m.axis = io::deg_to_rad(axis_deg);
  if (compensation_axis_deg) m.compensation_axis = io::deg_to_rad(*compensation_axis_deg);
  return m;
}

void ExperimentConfig::validate() const {
  if (!(theta.step_deg > 0.0) || !(theta.stop_deg >= theta.start_deg)) {
    throw ConfigError("theta: need step_deg > 0 and stop_deg >= start_deg");
  }
  if ((theta.stop_deg - theta.start_deg) / theta.step_deg > 1e5) throw ConfigError("theta: grid too large");
  if (imperfection.model()) imperfection.model()->validate();
  fringe::FringeModelParams env = envelope;
  env.v = 0.0;
  env.validate();
  detector.validate();
  if (frames.n_frames < 2) throw ConfigError("frames.n_frames: need at least 2 frames per angle");
  if (!(frames.drift_step_rad >= 0.0) || !(frames.drift_bound_rad > 0.0)) {
    throw ConfigError("frames: drift_step_rad must be >= 0 and drift_bound_rad > 0");
  }
  if (fit.max_iterations < 1) throw ConfigError("fit.max_iterations must be positive");
  if (!(weakmeas.a_over_sigma > 0.0) || !(weakmeas.realistic_a_over_sigma > 0.0)) {
    throw ConfigError("weakmeas: displacement ratios must be positive");
  }
  if (!(weakmeas.beam_sigma > 0.0)) throw ConfigError("weakmeas.beam_sigma must be positive");
  if (!(weakmeas.centroid_noise_std >= 0.0)) throw ConfigError("weakmeas.centroid_noise_std must be >= 0");
  if (!decompose.psi.is_normalized()) throw ConfigError("decompose.psi is not normalized");
  if (!(synth.v >= 0.0 && synth.v <= 1.0)) throw ConfigError("synth.v must lie in [0, 1]");
  if (synth.n_frames < 1) throw ConfigError("synth.n_frames must be positive");
  if (synth.source == SynthSource::two_beam) synth.two_beam.validate();
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig c;
  Section root(&j, "config");
  c.mode = root.choice("mode", c.mode, kModes);
  c.seed = root.unsigned_integer("seed", c.seed);
  c.stabilized = root.boolean("stabilized", c.stabilized);
  c.format = root.choice("format", c.format, kFormats);
  c.svg = root.boolean("svg", c.svg);
  c.timestamps = root.boolean("timestamps", c.timestamps);

  {
    Section s = root.child("paths");
    c.paths.input = s.string("input", c.paths.input);
    c.paths.output = s.string("output", c.paths.output);
    s.finish();
  }
  parse_decompose(root.child("decompose"), c.decompose);
  {
    Section s = root.child("theta");
    c.theta.start_deg = s.number("start_deg", c.theta.start_deg);
    c.theta.stop_deg = s.number("stop_deg", c.theta.stop_deg);
    c.theta.step_deg = s.number("step_deg", c.theta.step_deg);
    s.finish();
  }
  {
    Section s = root.child("imperfection");
    c.imperfection.retardance_rad = s.number("retardance_rad", c.imperfection.retardance_rad);
    c.imperfection.axis_deg = s.number("axis_deg", c.imperfection.axis_deg);
    c.imperfection.compensation_axis_deg = s.optional_number("compensation_axis_deg");
    s.finish();
  }
  parse_envelope(root.child("envelope"), c.envelope);
  parse_detector(root.child("detector"), c.detector);
  {
    Section s = root.child("frames");
    c.frames.n_frames = s.unsigned_integer("n_frames", c.frames.n_frames);
    c.frames.phase_mode = s.choice("phase_mode", c.frames.phase_mode, kPhaseModes);
    c.frames.drift_step_rad = s.number("drift_step_rad", c.frames.drift_step_rad);
    c.frames.drift_bound_rad = s.number("drift_bound_rad", c.frames.drift_bound_rad);
    s.finish();
  }
  {
    Section s = root.child("fit");
    c.fit.method = s.choice("method", c.fit.method, kMethods);
    c.fit.max_iterations = static_cast<int>(s.unsigned_integer("max_iterations", c.fit.max_iterations));
    c.fit.convention = s.choice("convention", c.fit.convention, kConventions);
    s.finish();
  }
  {
    Section s = root.child("weakmeas");
    auto& w = c.weakmeas;
    w.a_over_sigma = s.number("a_over_sigma", w.a_over_sigma);
    w.realistic_a_over_sigma = s.number("realistic_a_over_sigma", w.realistic_a_over_sigma);
    w.beam_sigma = s.number("beam_sigma", w.beam_sigma);
    w.displaced = s.choice("displaced", w.displaced, kComponents);
    w.centroid_noise_std = s.number("centroid_noise_std", w.centroid_noise_std);
    w.eigen_range_slope = s.number("eigen_range_slope", w.eigen_range_slope);
    w.eigen_range_offset = s.number("eigen_range_offset", w.eigen_range_offset);
    s.finish();
  }
  {
    Section s = root.child("synth");
    auto& y = c.synth;
    y.source = s.choice("source", y.source, kSources);
    y.theta_deg = s.number("theta_deg", y.theta_deg);
    y.with_r = s.boolean("with_r", y.with_r);
    y.v = s.number("v", y.v);
    y.n_frames = s.unsigned_integer("n_frames", y.n_frames);
    y.layout = s.choice("layout", y.layout, kLayouts);
    parse_two_beam(s.child("two_beam"), y.two_beam);
    s.finish();
  }
  {
    Section s = root.child("figure");
    c.figure.id = s.choice("id", c.figure.id, kFigures);
    if (const json* t = s.raw("fig9_theta_deg")) {
      if (!t->is_array() || t->empty()) throw ConfigError("config.figure.fig9_theta_deg: expected a non-empty array");
      c.figure.fig9_theta_deg.clear();
      for (const auto& e : *t) {
        if (!e.is_number()) throw ConfigError("config.figure.fig9_theta_deg: expected numbers");
        c.figure.fig9_theta_deg.push_back(e.get<double>());
      }
    }
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  j["stabilized"] = c.stabilized;
  j["format"] = name_of(c.format, kFormats);
  j["svg"] = c.svg;
  j["timestamps"] = c.timestamps;
  j["paths"] = {{"input", c.paths.input}, {"output", c.paths.output}};
  j["decompose"] = {
      {"operator", c.decompose.op_name.empty() ? io::to_json(c.decompose.op) : json(c.decompose.op_name)},
      {"psi", c.decompose.psi_name.empty() ? io::to_json(c.decompose.psi) : json(c.decompose.psi_name)}};
  j["theta"] = {{"start_deg", c.theta.start_deg}, {"stop_deg", c.theta.stop_deg}, {"step_deg", c.theta.step_deg}};
  j["imperfection"] = {{"retardance_rad", c.imperfection.retardance_rad},
                       {"axis_deg", c.imperfection.axis_deg},
                       {"compensation_axis_deg", c.imperfection.compensation_axis_deg
                                                     ? json(*c.imperfection.compensation_axis_deg)
                                                     : json(nullptr)}};
  j["envelope"] = {{"a0", c.envelope.a0},
                   {"mu", c.envelope.mu},
                   {"sigma", c.envelope.sigma},
                   {"k", c.envelope.k},
                   {"alpha", c.envelope.alpha},
                   {"convention", name_of(c.envelope.convention, kConventions)}};
  j["detector"] = {{"n_pixels", c.detector.n_pixels},
                   {"pixel_half_width", c.detector.pixel_half_width},
                   {"read_noise_std", c.detector.read_noise_std},
                   {"shot_noise", c.detector.shot_noise},
                   {"photons_per_unit", c.detector.photons_per_unit}};
  j["frames"] = {{"n_frames", c.frames.n_frames},
                 {"phase_mode", name_of(c.frames.phase_mode, kPhaseModes)},
                 {"drift_step_rad", c.frames.drift_step_rad},
                 {"drift_bound_rad", c.frames.drift_bound_rad}};
  j["fit"] = {{"method", name_of(c.fit.method, kMethods)},
              {"max_iterations", c.fit.max_iterations},
              {"convention", name_of(c.fit.convention, kConventions)}};
  j["weakmeas"] = {{"a_over_sigma", c.weakmeas.a_over_sigma},
                   {"realistic_a_over_sigma", c.weakmeas.realistic_a_over_sigma},
                   {"beam_sigma", c.weakmeas.beam_sigma},
                   {"displaced", name_of(c.weakmeas.displaced, kComponents)},
                   {"centroid_noise_std", c.weakmeas.centroid_noise_std},
                   {"eigen_range_slope", c.weakmeas.eigen_range_slope},
                   {"eigen_range_offset", c.weakmeas.eigen_range_offset}};
  const auto& t = c.synth.two_beam;
  j["synth"] = {{"source", name_of(c.synth.source, kSources)},
                {"theta_deg", c.synth.theta_deg},
                {"with_r", c.synth.with_r},
                {"v", c.synth.v},
                {"n_frames", c.synth.n_frames},
                {"layout", name_of(c.synth.layout, kLayouts)},
                {"two_beam",
                 {{"amp1", t.amp1},
                  {"amp2", t.amp2},
                  {"center1", t.center1},
                  {"center2", t.center2},
                  {"sigma1", t.sigma1},
                  {"sigma2", t.sigma2},
                  {"tilt_k", t.tilt_k},
                  {"rel_phase", t.rel_phase}}}};
  j["figure"] = {{"id", to_string(c.figure.id)}, {"fig9_theta_deg", c.figure.fig9_theta_deg}};
  return j;
}

std::string to_string(Mode m) { return name_of(m, kModes); }
std::string to_string(Figure f) { return name_of(f, kFigures); }

Mode parse_mode(const std::string& s) {
  const auto it = kModes.find(s);
  if (it == kModes.end()) throw ConfigError("unknown mode '" + s + "'");
  return it->second;
}

Figure parse_figure(const std::string& s) {
  const auto it = kFigures.find(s);
  if (it == kFigures.end()) throw ConfigError("unknown figure '" + s + "'");
  return it->second;
}

OutputFormat parse_format(const std::string& s) {
  const auto it = kFormats.find(s);
  if (it == kFormats.end()) throw ConfigError("unknown format '" + s + "'");
  return it->second;
}

}  // namespace mzweak::app
