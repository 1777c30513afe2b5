#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mzweak/app/config.hpp"
#include "mzweak/fringe_fit.hpp"

namespace mzweak::app {

/// One angle of the simulated polarizer / half-wave-plate experiment: frames
/// with and without the polarizer, fitted and reduced, and the inferred values.
struct MziSweepRow {
  double theta = 0.0;  // radians
  std::optional<fringe::SweepStatistics> with_r;
  std::optional<fringe::SweepStatistics> without_r;
  std::optional<double> z_abs;
  std::optional<double> weak_value_abs;
  bool amplification_region = false;
  double overlap = 0.0;  // Re <phi|psi>
  /// Arms whose frames could not be reduced; such an arm reports v_mean = NaN
  /// and n_frames = 0, and nothing is inferred from it.
  std::vector<std::string> failures;
};

struct SweepSelection {
  bool with_r = true;
  bool without_r = true;
};

/// Synthesizes cfg.frames.n_frames frames per angle (seeded per angle and arm
/// from cfg.seed), fits them with cfg.fit.method and infers |z| and |R_w|.
/// Degenerate or non-converging arms are recorded in MziSweepRow::failures
/// instead of aborting the sweep; configuration errors still throw.
std::vector<MziSweepRow> run_mzi_sweep(const ExperimentConfig& cfg, std::span<const double> thetas,
                                       SweepSelection selection = {});

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<std::string> outputs;  // file names relative to output_dir, in write order
};

/// Executes cfg.mode, writes outputs and manifest.json into cfg.paths.output.
/// Human-readable progress and summaries go to `log`.
RunResult run(const ExperimentConfig& cfg, std::ostream& log);

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// UTC wall-clock time in ISO 8601.
std::string utc_timestamp();

}  // namespace mzweak::app
