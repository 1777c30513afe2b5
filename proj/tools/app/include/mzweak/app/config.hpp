#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mzweak/fringe_fit.hpp"
#include "mzweak/fringe_synth.hpp"
#include "mzweak/jones.hpp"
#include "mzweak/mzi.hpp"
#include "mzweak/weakmeas.hpp"

namespace mzweak::app {

enum class Mode { decompose, mzi_theory, synth, fit, sweep, weakmeas, reproduce };
enum class OutputFormat { csv, json };
enum class Figure { fig4, fig5, fig6, fig8, fig9, fig10 };
enum class SynthSource { model, mzi, two_beam };
enum class SynthLayout { file_per_frame, wide };

struct PathsConfig {
  std::string input;
  std::string output = "out";
};

struct DecomposeConfig {
  jones::JonesMatrix op = jones::lowering();
  std::string op_name = "lowering";  // empty when given as entries
  jones::JonesVector psi = jones::JonesVector::diagonal();
  std::string psi_name = "plus";
};

struct ThetaGrid {
  double start_deg = 0.0;
  double stop_deg = 360.0;
  double step_deg = 2.0;

  /// Inclusive grid in radians.
  std::vector<double> radians() const;
};

struct ImperfectionConfig {
  double retardance_rad = 0.0;
  double axis_deg = 45.0;
  std::optional<double> compensation_axis_deg;

  std::optional<mzi::ImperfectionModel> model() const;
};

struct FramesConfig {
  std::size_t n_frames = 100;
  fringe::FramePhase phase_mode = fringe::FramePhase::unstabilized;
  double drift_step_rad = 0.1;
  double drift_bound_rad = 0.7853981633974483;
};

struct FitConfig {
  fringe::FitMethod method = fringe::FitMethod::full_model;
  int max_iterations = 200;
  fringe::PhaseConvention convention = fringe::PhaseConvention::envelope_centered;
};

struct WeakmeasConfig {
  double a_over_sigma = weakmeas::kWeakRatio;
  double realistic_a_over_sigma = weakmeas::kRealisticRatio;
  double beam_sigma = weakmeas::kDefaultBeamSigma;
  weakmeas::Component displaced = weakmeas::Component::V;
  double centroid_noise_std = 0.0;
  double eigen_range_slope = 1.0;
  double eigen_range_offset = 0.0;
};

struct SynthConfig {
  SynthSource source = SynthSource::mzi;
  double theta_deg = 45.0;
  bool with_r = true;
  double v = 0.8;  // source = model
  std::size_t n_frames = 1;
  SynthLayout layout = SynthLayout::file_per_frame;
  fringe::TwoBeamConfig two_beam;
};

struct FigureConfig {
  Figure id = Figure::fig5;
  std::vector<double> fig9_theta_deg{45.0, 20.0, 5.0, 0.0};
};

struct ExperimentConfig {
  Mode mode = Mode::reproduce;
  std::uint64_t seed = 0;
  bool stabilized = false;
  OutputFormat format = OutputFormat::csv;
  bool svg = true;
  bool timestamps = true;
  PathsConfig paths;
  DecomposeConfig decompose;
  ThetaGrid theta;
  ImperfectionConfig imperfection;
  fringe::FringeModelParams envelope{1.0, 512.0, 120.0, 0.0, 0.25, 0.0};
  fringe::DetectorConfig detector;
  FramesConfig frames;
  FitConfig fit;
  WeakmeasConfig weakmeas;
  SynthConfig synth;
  FigureConfig figure;

  void validate() const;
};

/// Parses a configuration document. Every object level rejects unknown keys;
/// missing keys take their defaults. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Fully resolved configuration; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& c);

std::string to_string(Mode m);
std::string to_string(Figure f);
Mode parse_mode(const std::string& s);
Figure parse_figure(const std::string& s);
OutputFormat parse_format(const std::string& s);

}  // namespace mzweak::app
