#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "mzweak/errors.hpp"
#include "mzweak/fringe_synth.hpp"
#include "mzweak/io.hpp"
#include "mzweak/mzi.hpp"
#include "oracles.hpp"

namespace {

using namespace mzweak;
using nlohmann::json;

TEST(Format, ShortestRoundTrip) {
  oracle::Random rng(51);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal() * std::pow(10.0, rng.uniform(-30, 30));
    EXPECT_EQ(std::stod(io::format_double(x)), x);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(io::format_double(-0.0), "0");
  EXPECT_EQ(io::format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(io::format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(io::format_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Degrees, ConversionAndGridLabels) {
  EXPECT_NEAR(io::deg_to_rad(180.0), oracle::kPi, 1e-15);
  EXPECT_NEAR(io::rad_to_deg(oracle::kPi / 2), 90.0, 1e-13);
  EXPECT_EQ(io::format_degrees(io::deg_to_rad(2.0) * 23), "46");
  EXPECT_EQ(io::format_degrees(io::deg_to_rad(22.5)), "22.5");
}

TEST(JonesJson, RoundTripRowMajorPairs) {
  oracle::Random rng(52);
  const auto m = rng.matrix();
  const json j = io::to_json(m);
  ASSERT_EQ(j.size(), 4u);
  EXPECT_EQ(j[1][0].get<double>(), m(0, 1).real());
  EXPECT_EQ(j[2][1].get<double>(), m(1, 0).imag());
  EXPECT_EQ(jones::max_abs_diff(io::jones_matrix_from_json(j), m), 0.0);
  const auto v = rng.state();
  const auto back = io::jones_vector_from_json(io::to_json(v));
  EXPECT_EQ(back.h, v.h);
  EXPECT_EQ(back.v, v.v);
}

TEST(JonesJson, MalformedInputIsConfigError) {
  EXPECT_THROW(io::jones_matrix_from_json(json::array({1, 2, 3})), ConfigError);
  EXPECT_THROW(io::jones_matrix_from_json(json::parse("[[1,0],[0,0],[0,0],[1]]")), ConfigError);
  EXPECT_THROW(io::jones_vector_from_json(json::parse("[[1,0],[0,\"x\"]]")), ConfigError);
}

TEST(Csv, TableWritesHeaderAndRows) {
  io::CsvTable t({"a", "b"});
  t.add_row({"1", "2"});
  t.add_row({"x", "nan"});
  std::ostringstream os;
  t.write(os);
  EXPECT_EQ(os.str(), "a,b\n1,2\nx,nan\n");
  EXPECT_THROW(t.add_row({"1"}), InvalidArgument);
}

TEST(Csv, ProfileRoundTrip) {
  fringe::DetectorConfig d;
  d.seed = 3;
  const auto prof = fringe::generate_frames(fringe::FringeModelParams{1, 512, 120, 0.6, 0.25, 0}, d, 1).front();
  std::stringstream ss;
  io::profile_table(prof).write(ss);
  const auto back = io::read_profile_csv(ss);
  EXPECT_EQ(back.intensities, prof.intensities);
}

TEST(Csv, ProfileReaderRejectsBadInput) {
  auto parse = [](const std::string& text) {
    std::istringstream is(text);
    return io::read_profile_csv(is);
  };
  EXPECT_THROW(parse(""), ConfigError);
  EXPECT_THROW(parse("pixel_index,intensity\n"), ConfigError);
  EXPECT_THROW(parse("pixel,value\n0,1\n"), ConfigError);
  EXPECT_THROW(parse("pixel_index,intensity\n0,1\n2,1\n"), ConfigError);
  EXPECT_THROW(parse("pixel_index,intensity\n0,abc\n"), ConfigError);
  EXPECT_THROW(parse("pixel_index,intensity\n0,1,2\n"), ConfigError);
  EXPECT_THROW(parse("pixel_index,intensity\n0,nan\n"), ConfigError);
  EXPECT_EQ(parse("pixel_index,intensity\n0,1.5\n1,2\n").intensities, (std::vector<double>{1.5, 2.0}));
  EXPECT_THROW(io::read_profile_csv(std::filesystem::path("/nonexistent/profile.csv")), ConfigError);
}

TEST(Csv, TableHeaders) {
  const double thetas[] = {oracle::kPi / 4};
  std::ostringstream os;
  io::theory_table(mzi::theory_sweep(thetas)).write(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "theta_deg,v_with_r,v_without_r,z_abs,weak_value_abs,overlap");
  EXPECT_NE(os.str().find("\n45,"), std::string::npos);

  fringe::SweepStatistics s;
  s.theta = oracle::kPi / 2;
  s.visibility_mean = 0.5;
  s.n_frames = 100;
  std::ostringstream os2;
  io::sweep_table({s}).write(os2);
  EXPECT_EQ(os2.str(), "theta_deg,v_mean,v_std,n_frames,method\n90,0.5,0,100,full_model\n");
}

TEST(Json, FitResultCarriesParametersAndFlags) {
  fringe::FitResult r;
  r.params = {1, 512, 120, 0.8, 0.25, 0.3};
  r.visibility_out_of_range = true;
  const json j = io::to_json(r);
  EXPECT_EQ(j.at("params").at("v").get<double>(), 0.8);
  EXPECT_TRUE(j.at("visibility_out_of_range").get<bool>());
  EXPECT_TRUE(j.contains("param_std"));
}

}  // namespace
