#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mzweak/fringe_fit.hpp"
#include "mzweak/fringe_synth.hpp"
#include "mzweak/jones.hpp"
#include "mzweak/mzi.hpp"
#include "mzweak/weakmeas.hpp"

namespace mzweak::io {

/// Shortest decimal that round-trips; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double x);

/// Matrices as four [re, im] pairs in row-major order, vectors as two.
nlohmann::json to_json(const jones::JonesMatrix& m);
nlohmann::json to_json(const jones::JonesVector& v);
nlohmann::json to_json(jones::Complex z);
/// Throw ConfigError on malformed input.
jones::JonesMatrix jones_matrix_from_json(const nlohmann::json& j);
jones::JonesVector jones_vector_from_json(const nlohmann::json& j);

nlohmann::json to_json(const fringe::FringeModelParams& p);
nlohmann::json to_json(const fringe::DetectorConfig& d);
nlohmann::json to_json(const fringe::FitResult& r);
nlohmann::json to_json(const fringe::EnvelopeVisibility& r);

/// Sidecar for a synthesized profile: detector settings and, when known, the truth.
nlohmann::json profile_metadata(const fringe::FringeProfile& profile);

/// Plain comma-separated table with a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(std::ostream& os) const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// pixel_index,intensity
CsvTable profile_table(const fringe::FringeProfile& profile);

/// Reads a pixel_index,intensity file. Pixel indices must run 0, 1, 2, ...
/// Throws ConfigError on a missing, empty or malformed file.
fringe::FringeProfile read_profile_csv(const std::filesystem::path& path);
fringe::FringeProfile read_profile_csv(std::istream& is, std::string_view source = "<stream>");

/// theta_deg,v_with_r,v_without_r,z_abs,weak_value_abs,overlap
CsvTable theory_table(const std::vector<mzi::TheoryRow>& rows);

/// theta_deg,v_mean,v_std,n_frames,method
CsvTable sweep_table(const std::vector<fringe::SweepStatistics>& rows);

/// theta_deg,centroid_over_a,weak_value_re_inferred,weak_value_re_exact_eq2,a_over_sigma
CsvTable weak_sweep_table(const std::vector<weakmeas::WeakSweepRow>& rows, double a_over_sigma);

std::string_view to_string(fringe::FitMethod method);

/// Whole-file write; throws ConfigError when the file cannot be opened.
void write_text(const std::filesystem::path& path, std::string_view text);

double rad_to_deg(double rad);
double deg_to_rad(double deg);
/// Angle in degrees with the conversion round-off removed (to 1e-9 deg).
std::string format_degrees(double rad);

}  // namespace mzweak::io
